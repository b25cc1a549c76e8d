import assert from "node:assert/strict";
import { test } from "node:test";

import {
  FRAME_HEADER_BYTES,
  decodeFrameHeader,
  formatResidual,
  framePixels,
  streamUrl,
} from "../src/protocol.js";
import { rigWithRotation } from "../src/viewer.js";

function frameBuffer(
  seq: number,
  width: number,
  height: number,
  channels: number
): ArrayBuffer {
  const buf = new ArrayBuffer(FRAME_HEADER_BYTES + width * height * channels);
  const view = new DataView(buf);
  view.setUint32(0, seq, true);
  view.setUint16(4, width, true);
  view.setUint16(6, height, true);
  view.setUint8(8, channels);
  return buf;
}

test("frame header decodes little-endian fields", () => {
  const header = decodeFrameHeader(frameBuffer(7, 320, 240, 3));
  assert.deepEqual(header, { seq: 7, width: 320, height: 240, channels: 3 });
});

test("frame body length is validated", () => {
  const buf = frameBuffer(1, 4, 4, 1);
  assert.equal(framePixels(buf).byteLength, 16);
  const short = buf.slice(0, buf.byteLength - 3);
  assert.throws(() => framePixels(short));
});

test("short buffers are rejected", () => {
  assert.throws(() => decodeFrameHeader(new ArrayBuffer(4)));
});

test("residual formats to two decimals with degree sign", () => {
  assert.equal(formatResidual(0), "0.00°");
  assert.equal(formatResidual(1.2345), "1.23°");
});

test("stream url swaps scheme and appends the endpoint", () => {
  assert.equal(
    streamUrl("http://127.0.0.1:8750"),
    "ws://127.0.0.1:8750/api/stream"
  );
});

test("accepted rotation lands on the non-reference source, inverted", () => {
  const rig = {
    schema_version: 1,
    reference: "color",
    sources: [
      {
        id: "color",
        circle: { cx: 0, cy: 0, r_px: 10 },
        alpha_deg: 360,
        rotation: [1, 0, 0, 0, 1, 0, 0, 0, 1],
      },
      {
        id: "thermal",
        circle: { cx: 0, cy: 0, r_px: 10 },
        alpha_deg: 360,
        rotation: [1, 0, 0, 0, 1, 0, 0, 0, 1],
      },
    ],
    blend: { policy: "switch", weights: {}, active: "color" },
  };
  // quarter turn about +z maps color-frame rays onto thermal-frame rays;
  // the rig stores thermal->reference, i.e. the transpose
  const quarter = [0, -1, 0, 1, 0, 0, 0, 0, 1];
  const updated = rigWithRotation(rig, "color", "thermal", quarter);
  const thermal = updated.sources.find((s) => s.id === "thermal")!;
  assert.deepEqual(thermal.rotation, [0, 1, 0, -1, 0, 0, 0, 0, 1]);
  const color = updated.sources.find((s) => s.id === "color")!;
  assert.deepEqual(color.rotation, [1, 0, 0, 0, 1, 0, 0, 0, 1]);
});
