/** Console wiring: DOM events in, view states out, frames onto the canvas. */

import { formatResidual } from "./protocol.js";
import { UiSession } from "./session.js";
import {
  StreamViewer,
  fetchRig,
  postRegister,
  putRig,
  rigWithRotation,
} from "./viewer.js";

const base = window.location.origin;

async function start(): Promise<void> {
  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const stale = document.getElementById("stale") as HTMLElement;
  const blendSlider = document.getElementById("blend") as HTMLInputElement;
  const alphaSlider = document.getElementById("alpha") as HTMLInputElement;
  const residualLabel = document.getElementById("residual") as HTMLElement;
  const registerButton = document.getElementById("register") as HTMLButtonElement;
  const acceptButton = document.getElementById("accept") as HTMLButtonElement;

  const rig = await fetchRig(base);
  const sources = rig.sources.map((s) => s.id);

  const session = new UiSession({
    width: canvas.clientWidth || 960,
    height: canvas.clientHeight || 540,
    sources,
    send: (state) => viewer.send(JSON.stringify(state)),
  });
  const viewer = new StreamViewer(base, canvas, session, {
    onConnection: (connected) => {
      stale.style.display = connected ? "none" : "block";
    },
  });
  viewer.connect();

  canvas.addEventListener("mousedown", (e) => session.beginDrag(e.clientX, e.clientY));
  window.addEventListener("mousemove", (e) => session.dragTo(e.clientX, e.clientY));
  window.addEventListener("mouseup", () => session.endDrag());
  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    session.zoom(e.deltaY);
  });
  blendSlider.addEventListener("input", () =>
    session.setBlend(Number(blendSlider.value) / 100)
  );
  alphaSlider.addEventListener("input", () => {
    const alpha = Number(alphaSlider.value);
    for (const s of sources) session.setAlphaOverride(s, alpha);
  });

  // registration: clicks on the side-by-side source panes
  const paneA = document.getElementById("pane-a");
  const paneB = document.getElementById("pane-b");
  paneA?.addEventListener("click", (e) => {
    session.clickPaneA((e as MouseEvent).offsetX, (e as MouseEvent).offsetY);
    refreshRegisterButton();
  });
  paneB?.addEventListener("click", (e) => {
    session.clickPaneB((e as MouseEvent).offsetX, (e as MouseEvent).offsetY);
    refreshRegisterButton();
  });

  function refreshRegisterButton(): void {
    registerButton.disabled = !session.registerEnabled();
    registerButton.title = session.registerDisabledReason() ?? "";
  }
  refreshRegisterButton();

  let lastRotation: number[] | null = null;
  registerButton.addEventListener("click", async () => {
    try {
      const result = await postRegister(base, {
        a_source: sources[0],
        b_source: sources[1],
        pairs: session.pairs,
      });
      lastRotation = result.rotation;
      residualLabel.textContent = formatResidual(result.residual_deg);
      acceptButton.disabled = false;
    } catch (err) {
      residualLabel.textContent = String(err);
    }
  });
  acceptButton.addEventListener("click", async () => {
    if (!lastRotation) return;
    const current = await fetchRig(base);
    await putRig(
      base,
      rigWithRotation(current, sources[0], sources[1], lastRotation)
    );
    session.clearPairs();
    session.requestFrame();
    refreshRegisterButton();
  });
}

start().catch((err) => {
  document.body.textContent = `failed to start: ${err}`;
});
