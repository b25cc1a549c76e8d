/**
 * Browser glue: WebSocket lifecycle with reconnect, canvas painting of the
 * raw frame stream, and the registration HTTP calls. Every displayed pixel
 * comes from the service byte stream; the client never projects anything
 * itself.
 */

import {
  FrameHeader,
  RegisterRequest,
  RegisterResponse,
  RigDoc,
  apiUrl,
  decodeFrameHeader,
  framePixels,
  streamUrl,
} from "./protocol.js";
import { UiSession } from "./session.js";

export interface ViewerHooks {
  onFrame?: (header: FrameHeader) => void;
  onConnection?: (connected: boolean) => void;
}

export class StreamViewer {
  private ws: WebSocket | null = null;
  private closed = false;
  private retryMs = 300;

  constructor(
    private base: string,
    private canvas: HTMLCanvasElement,
    private session: UiSession,
    private hooks: ViewerHooks = {}
  ) {}

  connect(): void {
    this.closed = false;
    const ws = new WebSocket(streamUrl(this.base));
    ws.binaryType = "arraybuffer";
    this.ws = ws;
    ws.onopen = () => {
      this.retryMs = 300;
      this.hooks.onConnection?.(true);
      this.session.requestFrame();
    };
    ws.onmessage = (event) => {
      if (typeof event.data === "string") {
        console.warn("service:", event.data);
        this.session.frameArrived(); // unblock the send gate
        return;
      }
      this.paint(event.data as ArrayBuffer);
      this.session.frameArrived();
    };
    ws.onclose = () => {
      this.hooks.onConnection?.(false);
      if (!this.closed) {
        setTimeout(() => this.connect(), this.retryMs);
        this.retryMs = Math.min(this.retryMs * 2, 5000);
      }
    };
    ws.onerror = () => ws.close();
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }

  send(payload: string): void {
    if (this.ws && this.ws.readyState === WebSocket.OPEN) {
      this.ws.send(payload);
    }
  }

  private paint(buf: ArrayBuffer): void {
    const header = decodeFrameHeader(buf);
    const pixels = framePixels(buf);
    if (this.canvas.width !== header.width) this.canvas.width = header.width;
    if (this.canvas.height !== header.height) this.canvas.height = header.height;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const rgba = new Uint8ClampedArray(header.width * header.height * 4);
    const ch = header.channels;
    for (let i = 0, j = 0; j < rgba.length; i += ch, j += 4) {
      rgba[j] = pixels[i];
      rgba[j + 1] = pixels[ch === 1 ? i : i + 1];
      rgba[j + 2] = pixels[ch === 1 ? i : i + 2];
      rgba[j + 3] = 255;
    }
    ctx.putImageData(new ImageData(rgba, header.width, header.height), 0, 0);
    this.hooks.onFrame?.(header);
  }
}

export async function fetchRig(base: string): Promise<RigDoc> {
  const resp = await fetch(apiUrl(base, "/api/rig"));
  if (!resp.ok) throw new Error(`GET /api/rig failed: ${resp.status}`);
  return (await resp.json()) as RigDoc;
}

export async function putRig(base: string, rig: RigDoc): Promise<RigDoc> {
  const resp = await fetch(apiUrl(base, "/api/rig"), {
    method: "PUT",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(rig),
  });
  const body = await resp.json();
  if (!resp.ok) throw new Error(body.error ?? `PUT /api/rig: ${resp.status}`);
  return body as RigDoc;
}

export async function postRegister(
  base: string,
  request: RegisterRequest
): Promise<RegisterResponse> {
  const resp = await fetch(apiUrl(base, "/api/register"), {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(request),
  });
  const body = await resp.json();
  if (!resp.ok) {
    throw new Error(body.error ?? `POST /api/register: ${resp.status}`);
  }
  return body as RegisterResponse;
}

/** Fold an accepted registration into the rig document: the reference
 * keeps identity and the other source takes the estimated rotation
 * (rotation maps a-rays onto b-rays; the rig stores source->reference). */
export function rigWithRotation(
  rig: RigDoc,
  aSource: string,
  bSource: string,
  rotationAtoB: number[]
): RigDoc {
  const m = rotationAtoB;
  // transpose = inverse for a rotation matrix
  const inverse = [m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]];
  const sources = rig.sources.map((s) => {
    if (s.id === bSource && rig.reference === aSource) {
      return { ...s, rotation: inverse };
    }
    if (s.id === aSource && rig.reference === bSource) {
      return { ...s, rotation: [...m] };
    }
    return s;
  });
  return { ...rig, sources };
}
