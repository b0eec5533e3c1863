import init, { CoarseningDemo, WettingDemo } from "./pkg/spectral_ch_wasm_demo.js";

const $ = (id) => document.getElementById(id);

function draw(canvas, demo) {
  const n = demo.size();
  canvas.width = n;
  canvas.height = n;
  const pixels = new Uint8ClampedArray(demo.rgba());
  canvas.getContext("2d").putImageData(new ImageData(pixels, n, n), 0, 0);
}

await init();

let coarse;
let running = true;

function resetCoarse() {
  coarse = new CoarseningDemo(128, Number($("phases").value), $("model").value, BigInt($("seed").value));
  $("paint").max = $("phases").value;
}

$("reset").onclick = resetCoarse;
$("model").onchange = resetCoarse;
$("phases").onchange = resetCoarse;
$("run").onclick = () => {
  running = !running;
  $("run").textContent = running ? "Pause" : "Resume";
};
$("coarse").onclick = (ev) => {
  const r = ev.target.getBoundingClientRect();
  const x = (ev.clientX - r.left) / r.width;
  const y = 1 - (ev.clientY - r.top) / r.height;
  coarse.add_disc(Number($("paint").value) - 1, x, y, 0.08);
};

let wet;
function resetWet() {
  const s = Number($("sigma").value);
  $("lsval").textContent = s.toFixed(1);
  wet = new WettingDemo(96, s);
  $("young").textContent = wet.young_degrees().toFixed(1);
}
$("sigma").oninput = resetWet;

resetCoarse();
resetWet();

function frame() {
  try {
    if (running) coarse.step(5);
  } catch (e) {
    running = false;
    $("run").textContent = "Resume";
    console.error(e);
  }
  draw($("coarse"), coarse);
  $("cstep").textContent = coarse.steps_taken();
  $("energy").textContent = coarse.energy().toFixed(4);

  if (wet.steps_taken() < 3000) wet.step(20);
  draw($("wet"), wet);
  $("wstep").textContent = wet.steps_taken();
  const a = wet.angle_degrees();
  $("angle").textContent = Number.isNaN(a) ? "-" : a.toFixed(1);
  requestAnimationFrame(frame);
}
requestAnimationFrame(frame);
