/**
 * Operator session state: pan/zoom input mapping, the latest-wins send
 * gate mirroring the server's coalescing, the layer blend slider, and the
 * correspondence-click pairing used by the registration workflow.
 *
 * Everything here is plain state + pure-ish methods so it runs under node
 * tests; the DOM/canvas glue lives in viewer.ts.
 */

import { LayerPolicy, PixelPair, ViewState } from "./protocol.js";

export const PITCH_LIMIT_DEG = 90;
export const HFOV_MIN_DEG = 10;
export const HFOV_MAX_DEG = 120;
export const MIN_PAIRS = 2;

export function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

function wrapYaw(yaw: number): number {
  let y = yaw % 360;
  if (y >= 180) y -= 360;
  if (y < -180) y += 360;
  return y;
}

export interface SessionOptions {
  width: number;
  height: number;
  sources: string[];
  send: (state: ViewState) => void;
}

export class UiSession {
  yawDeg = 0;
  pitchDeg = 0;
  rollDeg = 0;
  hfovDeg = 60;
  blend = 0; // 0 = first source only, 1 = second source only
  blendMode: "switch" | "blend" = "switch";
  activeSource: string;
  alphaOverrides: Record<string, number> = {};

  dragging = false;
  private dragX = 0;
  private dragY = 0;

  private inFlight = false;
  private pending: ViewState | null = null;

  /** clicks awaiting their partner, per registration pane */
  pendingClickA: [number, number] | null = null;
  pairs: PixelPair[] = [];

  constructor(private options: SessionOptions) {
    this.activeSource = options.sources[0] ?? "";
  }

  viewState(): ViewState {
    const state: ViewState = {
      yaw_deg: wrapYaw(this.yawDeg),
      pitch_deg: clamp(this.pitchDeg, -PITCH_LIMIT_DEG, PITCH_LIMIT_DEG),
      roll_deg: this.rollDeg,
      hfov_deg: clamp(this.hfovDeg, HFOV_MIN_DEG, HFOV_MAX_DEG),
      width: this.options.width,
      height: this.options.height,
      layer: this.layerPolicy(),
    };
    if (Object.keys(this.alphaOverrides).length > 0) {
      state.alpha_overrides = { ...this.alphaOverrides };
    }
    return state;
  }

  layerPolicy(): LayerPolicy {
    if (this.blendMode === "switch" || this.options.sources.length < 2) {
      return { policy: "switch", source: this.activeSource };
    }
    const [first, second] = this.options.sources;
    return {
      policy: "blend",
      weights: { [first]: 1 - this.blend, [second]: this.blend },
    };
  }

  /** Push the current view to the service, latest-wins. */
  requestFrame(): void {
    const state = this.viewState();
    if (this.inFlight) {
      this.pending = state;
      return;
    }
    this.inFlight = true;
    this.options.send(state);
  }

  /** Call when the frame for the in-flight request arrived. */
  frameArrived(): void {
    this.inFlight = false;
    if (this.pending !== null) {
      const next = this.pending;
      this.pending = null;
      this.inFlight = true;
      this.options.send(next);
    }
  }

  /** True while a request waits behind the in-flight one. */
  hasPending(): boolean {
    return this.pending !== null;
  }

  beginDrag(x: number, y: number): void {
    this.dragging = true;
    this.dragX = x;
    this.dragY = y;
  }

  /**
   * Pan with the cursor: dragging right by half the canvas turns the view
   * left by half the horizontal field of view.
   */
  dragTo(x: number, y: number): void {
    if (!this.dragging) return;
    const dx = x - this.dragX;
    const dy = y - this.dragY;
    this.dragX = x;
    this.dragY = y;
    const degPerPx = this.hfovDeg / this.options.width;
    this.yawDeg = wrapYaw(this.yawDeg - dx * degPerPx);
    this.pitchDeg = clamp(
      this.pitchDeg + dy * degPerPx,
      -PITCH_LIMIT_DEG,
      PITCH_LIMIT_DEG
    );
    this.requestFrame();
  }

  endDrag(): void {
    this.dragging = false;
  }

  /** Wheel zoom: positive deltas widen the view, clamped to the hfov range. */
  zoom(deltaY: number): void {
    const factor = Math.exp(deltaY * 0.001);
    this.hfovDeg = clamp(this.hfovDeg * factor, HFOV_MIN_DEG, HFOV_MAX_DEG);
    this.requestFrame();
  }

  setBlend(value: number): void {
    this.blend = clamp(value, 0, 1);
    this.blendMode = "blend";
    this.requestFrame();
  }

  switchTo(source: string): void {
    if (!this.options.sources.includes(source)) {
      throw new Error(`unknown source ${source}`);
    }
    this.blendMode = "switch";
    this.activeSource = source;
    this.requestFrame();
  }

  setAlphaOverride(source: string, alphaDeg: number | null): void {
    if (alphaDeg === null) {
      delete this.alphaOverrides[source];
    } else {
      this.alphaOverrides[source] = alphaDeg;
    }
    this.requestFrame();
  }

  // --- registration workflow -------------------------------------------

  /** Record a click in pane A (coordinates in source pixels). */
  clickPaneA(x: number, y: number): void {
    this.pendingClickA = [x, y];
  }

  /** Record the partner click in pane B, completing one pair. */
  clickPaneB(x: number, y: number): boolean {
    if (this.pendingClickA === null) return false;
    this.pairs.push({ a: this.pendingClickA, b: [x, y] });
    this.pendingClickA = null;
    return true;
  }

  clearPairs(): void {
    this.pairs = [];
    this.pendingClickA = null;
  }

  registerEnabled(): boolean {
    return this.pairs.length >= MIN_PAIRS;
  }

  registerDisabledReason(): string | null {
    return this.registerEnabled()
      ? null
      : `need at least ${MIN_PAIRS} correspondence pairs`;
  }
}
