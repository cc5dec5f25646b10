import init, { Demo } from "./pkg/edgealign_wasm.js";

const WIDTH = 320;
const HEIGHT = 240;

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const status = (text) => { $("status").textContent = text; };

let demo = null;

function paint(canvas, rgba, w, h, scale) {
  const off = new OffscreenCanvas(w, h);
  off.getContext("2d").putImageData(new ImageData(new Uint8ClampedArray(rgba), w, h), 0, 0);
  canvas.width = w * scale;
  canvas.height = h * scale;
  const ctx = canvas.getContext("2d");
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(off, 0, 0, w * scale, h * scale);
}

function showScene() {
  paint($("scene"), demo.scene_rgba(), demo.width(), demo.height(), 2);
}

function render() {
  try {
    demo?.free();
    demo = new Demo(WIDTH, HEIGHT, $("shape").value, num("size"), num("x"), num("y"), num("theta"),
      num("clutter"), num("seed"), num("noise"));
  } catch (e) {
    demo = null;
    status(`cannot render: ${e}`);
    return;
  }
  showScene();
  status(`rendered ${WIDTH}x${HEIGHT} scene`);
}

function detect() {
  if (!demo) return;
  const t0 = performance.now();
  let doc;
  try {
    doc = JSON.parse(demo.detect(num("neighborhood"), num("step"), num("step-theta"), num("levels")));
  } catch (e) {
    status(`search failed: ${e}`);
    return;
  }
  const ms = performance.now() - t0;
  showScene();
  const p = doc.pose, t = doc.expected;
  status(
    `${doc.detected ? "detected" : "no detection"} in ${ms.toFixed(0)} ms\n` +
    `pose     (${p.x.toFixed(2)}, ${p.y.toFixed(2)}, ${p.theta_deg.toFixed(2)}°)  score ${doc.score.toFixed(4)}\n` +
    `expected (${t.x.toFixed(2)}, ${t.y.toFixed(2)}, ${t.theta_deg.toFixed(2)}°)  ${doc.model_points} model points`);
}

function heat() {
  if (!demo) return;
  const step = num("heat-step");
  const w = demo.heatmap_width(step), h = demo.heatmap_height(step);
  const t0 = performance.now();
  try {
    paint($("heat1"), demo.heatmap(1, num("heat-theta"), step), w, h, 2 * step);
    paint($("heat3"), demo.heatmap(3, num("heat-theta"), step), w, h, 2 * step);
  } catch (e) {
    status(`score map failed: ${e}`);
    return;
  }
  status(`score maps ${w}x${h} in ${(performance.now() - t0).toFixed(0)} ms; brighter is a better match`);
}

await init();
$("render").addEventListener("click", render);
$("detect").addEventListener("click", detect);
$("heat").addEventListener("click", heat);
render();
