/**
 * Wire contract with the stream service: view-state JSON out, binary
 * frames in, plus the rig and registration documents.
 */

export interface LayerPolicy {
  policy: "switch" | "blend";
  source?: string;
  weights?: Record<string, number>;
}

export interface ViewState {
  yaw_deg: number;
  pitch_deg: number;
  roll_deg: number;
  hfov_deg: number;
  width: number;
  height: number;
  layer?: LayerPolicy;
  alpha_overrides?: Record<string, number>;
}

export interface FrameHeader {
  seq: number;
  width: number;
  height: number;
  channels: number;
}

export const FRAME_HEADER_BYTES = 9;

/** Little-endian header: u32 seq, u16 width, u16 height, u8 channels. */
export function decodeFrameHeader(buf: ArrayBuffer): FrameHeader {
  if (buf.byteLength < FRAME_HEADER_BYTES) {
    throw new Error(`frame too short: ${buf.byteLength} bytes`);
  }
  const view = new DataView(buf);
  return {
    seq: view.getUint32(0, true),
    width: view.getUint16(4, true),
    height: view.getUint16(6, true),
    channels: view.getUint8(8),
  };
}

export function framePixels(buf: ArrayBuffer): Uint8Array {
  const header = decodeFrameHeader(buf);
  const expected = header.width * header.height * header.channels;
  const body = new Uint8Array(buf, FRAME_HEADER_BYTES);
  if (body.byteLength !== expected) {
    throw new Error(
      `frame body ${body.byteLength} bytes, header says ${expected}`
    );
  }
  return body;
}

export interface RigSourceDoc {
  id: string;
  circle: { cx: number; cy: number; r_px: number };
  alpha_deg: number;
  rotation: number[];
}

export interface RigDoc {
  schema_version: number;
  reference: string;
  sources: RigSourceDoc[];
  blend: { policy: string; weights: Record<string, number>; active?: string };
}

export interface PixelPair {
  a: [number, number];
  b: [number, number];
}

export interface RegisterRequest {
  a_source: string;
  b_source: string;
  pairs: PixelPair[];
}

export interface RegisterResponse {
  rotation: number[];
  residual_deg: number;
}

/** Residual as shown to the operator, e.g. "0.00°". */
export function formatResidual(residualDeg: number): string {
  return `${residualDeg.toFixed(2)}°`;
}

export function apiUrl(base: string, path: string): string {
  return base.replace(/\/$/, "") + path;
}

export function streamUrl(base: string): string {
  const url = apiUrl(base, "/api/stream");
  return url.replace(/^http/, "ws");
}
