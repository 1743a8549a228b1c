import init, { betaCurve, crossoverCurve, degreeGrowth } from "./pkg/srpat_demo.js";

const PHI = (1 + Math.sqrt(5)) / 2;
const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

// series: [{ name, xs, ys }], axes may be "log" or "lin"
function plot(canvas, series, { xscale = "log", yscale = "lin", hline = null } = {}) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 50;
  ctx.clearRect(0, 0, W, H);
  const fx = xscale === "log" ? Math.log10 : (v) => v;
  const fy = yscale === "log" ? Math.log10 : (v) => v;
  let x0 = Infinity, x1 = -Infinity, y0 = Infinity, y1 = -Infinity;
  for (const s of series) {
    for (let k = 0; k < s.xs.length; k++) {
      x0 = Math.min(x0, fx(s.xs[k])); x1 = Math.max(x1, fx(s.xs[k]));
      y0 = Math.min(y0, fy(s.ys[k])); y1 = Math.max(y1, fy(s.ys[k]));
    }
  }
  if (hline !== null) { y0 = Math.min(y0, fy(hline)); y1 = Math.max(y1, fy(hline)); }
  if (x1 === x0) x1 = x0 + 1;
  if (y1 === y0) y1 = y0 + 1;
  const px = (v) => pad + (fx(v) - x0) / (x1 - x0) * (W - 2 * pad);
  const py = (v) => H - pad + (y0 - fy(v)) / (y1 - y0) * (H - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, W - 2 * pad, H - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "11px sans-serif";
  const label = (v, log) => log ? "1e" + v.toFixed(1) : v.toPrecision(3);
  ctx.fillText(label(x0, xscale === "log"), pad, H - pad + 14);
  ctx.fillText(label(x1, xscale === "log"), W - pad - 30, H - pad + 14);
  ctx.fillText(label(y0, yscale === "log"), 4, H - pad);
  ctx.fillText(label(y1, yscale === "log"), 4, pad + 4);

  if (hline !== null) {
    ctx.setLineDash([4, 4]);
    ctx.strokeStyle = "#999";
    ctx.beginPath();
    ctx.moveTo(pad, py(hline));
    ctx.lineTo(W - pad, py(hline));
    ctx.stroke();
    ctx.setLineDash([]);
  }

  series.forEach((s, n) => {
    ctx.strokeStyle = COLORS[n % COLORS.length];
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    for (let k = 0; k < s.xs.length; k++) {
      const X = px(s.xs[k]), Y = py(s.ys[k]);
      k === 0 ? ctx.moveTo(X, Y) : ctx.lineTo(X, Y);
    }
    ctx.stroke();
    ctx.fillStyle = ctx.strokeStyle;
    ctx.fillText(s.name, pad + 8, pad + 14 + 14 * n);
  });
}

function columns(flat, width) {
  const cols = Array.from({ length: width }, () => []);
  for (let k = 0; k + width <= flat.length; k += width) {
    for (let c = 0; c < width; c++) cols[c].push(flat[k + c]);
  }
  return cols;
}

function guarded(noteId, f) {
  const note = $(noteId);
  try {
    note.className = "note";
    const t0 = performance.now();
    const msg = f();
    note.textContent = `${msg} (${(performance.now() - t0).toFixed(0)} ms)`;
  } catch (e) {
    note.className = "note err";
    note.textContent = String(e.message ?? e);
  }
}

function drawBeta() {
  guarded("beta-note", () => {
    const flat = betaCurve(num("beta-i"), num("beta-t"));
    const cross = flat[flat.length - 1];
    const [t, beta, x] = columns(flat.subarray(0, flat.length - 1), 3);
    plot($("beta-canvas"), [
      { name: "beta_t", xs: t, ys: beta },
      { name: "x_t", xs: t, ys: x },
    ], { hline: PHI });
    return cross > 0 ? `crossover T(i) = ${cross}` : "no crossover before the horizon";
  });
}

function drawCrossover() {
  guarded("cross-note", () => {
    const [i, T] = columns(crossoverCurve(num("cross-i")), 2);
    plot($("cross-canvas"), [{ name: "T(i)", xs: i, ys: T }], { yscale: "log" });
    const n = i.length - 1;
    return `T(${i[n]}) = ${T[n]}, T(i)/i^2 = ${(T[n] / (i[n] * i[n])).toFixed(3)}`;
  });
}

function drawGrowth() {
  guarded("grow-note", () => {
    const [t, sim, exact, bound] = columns(degreeGrowth(num("grow-i"), num("grow-t"), num("grow-s"), num("grow-r")), 4);
    plot($("grow-canvas"), [
      { name: "simulated mean", xs: t, ys: sim },
      { name: "exact mean", xs: t, ys: exact },
      { name: "upper bound", xs: t, ys: bound },
    ], { yscale: "log" });
    const n = t.length - 1;
    return `mean degree at t = ${t[n]}: simulated ${sim[n].toFixed(2)}, exact ${exact[n].toFixed(2)}`;
  });
}

await init();
$("beta-go").onclick = drawBeta;
$("cross-go").onclick = drawCrossover;
$("grow-go").onclick = drawGrowth;
drawBeta();
drawCrossover();
drawGrowth();
