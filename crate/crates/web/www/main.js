import init, { physical_parameters, bare_gamma_curve, reflection_spectrum } from "./pkg/wgqed_web.js";

const val = (id) => {
  const text = document.getElementById(id).value.trim();
  if (!/^[0-9+\-*/(). pie]*$/.test(text)) throw new Error(`bad number: ${text}`);
  return Function("pi", `"use strict"; return (${text});`)(Math.PI);
};

function show(id, text, isError = false) {
  const el = document.getElementById(id);
  el.textContent = text;
  el.className = isError ? "out err" : "out";
}

function plot(canvasId, series, xLabel) {
  const cv = document.getElementById(canvasId);
  const ctx = cv.getContext("2d");
  const pad = 40;
  ctx.clearRect(0, 0, cv.width, cv.height);
  const pts = series.flatMap((s) => s.points).filter(([, y]) => Number.isFinite(y));
  if (pts.length === 0) return;
  const xs = pts.map((p) => p[0]);
  const ys = pts.map((p) => p[1]);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(0, ...ys), Math.max(...ys) * 1.05 || 1];
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (cv.width - 2 * pad);
  const sy = (y) => cv.height - pad - ((y - y0) / (y1 - y0 || 1)) * (cv.height - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.strokeRect(pad, pad, cv.width - 2 * pad, cv.height - 2 * pad);
  ctx.fillStyle = "#333";
  ctx.fillText(x0.toFixed(2), pad, cv.height - pad + 14);
  ctx.fillText(x1.toFixed(2), cv.width - pad - 30, cv.height - pad + 14);
  ctx.fillText(xLabel, cv.width / 2, cv.height - 8);
  ctx.fillText(y1.toFixed(3), 2, pad + 4);
  ctx.fillText(y0.toFixed(3), 2, cv.height - pad);

  series.forEach((s, i) => {
    ctx.strokeStyle = ctx.fillStyle = s.color;
    ctx.beginPath();
    s.points.filter(([, y]) => Number.isFinite(y)).forEach(([x, y], j) => {
      if (s.markers) ctx.fillRect(sx(x) - 3, sy(y) - 3, 6, 6);
      else if (j === 0) ctx.moveTo(sx(x), sy(y));
      else ctx.lineTo(sx(x), sy(y));
    });
    ctx.stroke();
    ctx.fillText(s.name, cv.width - pad - 120, pad + 16 * (i + 1));
  });
}

const pairs = (flat, stride, col) => {
  const out = [];
  for (let i = 0; i < flat.length; i += stride) out.push([flat[i], flat[i + col]]);
  return out;
};

function renorm() {
  try {
    const [wa, g, f, h] = physical_parameters(val("r-w0"), val("r-g"), val("r-ir"), val("r-uv"));
    show("r-out", `omega_A = ${wa.toFixed(6)}\nGamma   = ${g.toFixed(6)}\nf       = ${f.toFixed(6)}\nH       = ${h.toFixed(6)}`);
  } catch (e) {
    show("r-out", String(e.message ?? e), true);
  }
}

function curve() {
  const g = val("c-g");
  const flat = bare_gamma_curve(g, val("c-lo"), val("c-hi"), 400);
  plot("c-plot", [
    { name: "bare gamma", color: "#1f77b4", points: pairs(flat, 2, 1) },
    { name: "Gamma", color: "#aaa", points: [[flat[0], g], [flat[flat.length - 2], g]] },
  ], "half-width");
}

function spectrum() {
  show("s-out", "running...");
  setTimeout(() => {
    try {
      const t = performance.now();
      const flat = reflection_spectrum(val("s-w0"), val("s-g"), val("s-ir"), val("s-uv"),
        val("s-lo"), val("s-hi"), val("s-n"), val("s-steps"));
      plot("s-plot", [
        { name: "R simulated", color: "#d62728", markers: true, points: pairs(flat, 4, 1) },
        { name: "R bare", color: "#7f7f7f", points: pairs(flat, 4, 2) },
        { name: "R physical", color: "#2ca02c", points: pairs(flat, 4, 3) },
      ], "omega_p");
      show("s-out", `${flat.length / 4} runs in ${((performance.now() - t) / 1000).toFixed(1)} s`);
    } catch (e) {
      show("s-out", String(e.message ?? e), true);
    }
  }, 10);
}

await init();
document.getElementById("r-go").onclick = renorm;
document.getElementById("c-go").onclick = curve;
document.getElementById("s-go").onclick = spectrum;
renorm();
curve();
