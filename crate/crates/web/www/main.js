import init, { Mechanism } from "./pkg/prr_web.js";

const $ = (id) => document.getElementById(id);
const numbers = (text) => text.split(",").map((s) => Number(s.trim()));

function mechanism() {
  return new Mechanism(
    Float64Array.from(numbers($("links").value)),
    Float64Array.from(numbers($("offsets").value)),
    Number($("stroke").value),
  );
}

function report(target, message) {
  target.innerHTML = `<span class="error">${message}</span>`;
}

function fitSliders() {
  try {
    const [x0, x1, y0, y1] = mechanism().rectangle();
    for (const [id, lo, hi] of [["px", x0, x1], ["py", y0, y1]]) {
      const s = $(id);
      s.min = lo;
      s.max = hi;
      s.step = (hi - lo) / 500;
      s.value = (lo + hi) / 2;
    }
  } catch (e) {
    report($("pose-summary"), e.message ?? e);
  }
}

function drawPose() {
  try {
    const view = mechanism().pose(
      Number($("px").value), Number($("py").value), Number($("pt").value), $("branch").value,
    );
    $("pose-summary").textContent = view.summary;
    $("pose-svg").innerHTML = view.svg;
  } catch (e) {
    report($("pose-summary"), e.message ?? e);
  }
}

function drawWorkspace() {
  try {
    const n = Number($("n").value);
    const view = mechanism().workspace(n, n, Number($("k").value));
    $("ws-summary").textContent =
      `S = ${view.fraction.toFixed(4)}, dead zones: ${view.dead_zones}`;
    $("ws-svg").innerHTML = view.svg;
  } catch (e) {
    report($("ws-summary"), e.message ?? e);
  }
}

function runSweep() {
  const table = $("sweep");
  try {
    const strokes = numbers($("strokes").value);
    const s = mechanism().sweep(Float64Array.from(strokes), 100, 36);
    table.innerHTML = "<tr><th>stroke</th><th>S</th></tr>" +
      strokes.map((l, i) => `<tr><td>${l}</td><td>${s[i].toFixed(4)}</td></tr>`).join("");
  } catch (e) {
    report(table, e.message ?? e);
  }
}

await init();
fitSliders();
drawPose();
for (const id of ["links", "offsets", "stroke"]) {
  $(id).addEventListener("change", () => { fitSliders(); drawPose(); });
}
for (const id of ["px", "py", "pt", "branch"]) $(id).addEventListener("input", drawPose);
$("ws-run").addEventListener("click", drawWorkspace);
$("sweep-run").addEventListener("click", runSweep);
