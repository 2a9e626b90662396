import init, { conformalSlice, horizonSection, envelopeCurve } from "./pkg/geostatic_web.js";

const $ = (id) => document.getElementById(id);
const config = () => $("config").value;
const num = (id) => Number($(id).value);

function report(fn) {
  return () => {
    $("status").textContent = "";
    try {
      fn();
    } catch (e) {
      $("status").textContent = String(e);
    }
  };
}

function drawSlice() {
  const s = JSON.parse(conformalSlice(config(), num("slice-z"), num("slice-extent"), 200));
  const canvas = $("slice");
  const ctx = canvas.getContext("2d");
  const img = ctx.createImageData(s.n, s.n);
  // Log scale again so the wells near the holes do not wash out the rest.
  const top = Math.log1p(s.max);
  s.log_factor.forEach((v, idx) => {
    const t = v === null ? 1 : Math.log1p(v) / top;
    const row = s.n - 1 - Math.floor(idx / s.n);
    const o = 4 * (row * s.n + (idx % s.n));
    img.data[o] = 255 * t;
    img.data[o + 1] = 80 * (1 - t);
    img.data[o + 2] = 255 * (1 - t);
    img.data[o + 3] = 255;
  });
  const tmp = new OffscreenCanvas(s.n, s.n);
  tmp.getContext("2d").putImageData(img, 0, 0);
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(tmp, 0, 0, canvas.width, canvas.height);
}

function drawSection() {
  const s = JSON.parse(horizonSection(config(), num("section-hole")));
  $("section-info").textContent =
    `mean radius ${s.mean_radius.toPrecision(6)}, area ${s.area.toPrecision(6)}`;
  const canvas = $("section");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const pts = s.curve.concat(s.holes);
  const span = Math.max(...pts.map((p) => Math.max(Math.abs(p[0] - s.center[0]), Math.abs(p[1] - s.center[1])))) * 1.2;
  const map = (p) => [
    canvas.width / 2 + ((p[0] - s.center[0]) / span) * (canvas.width / 2),
    canvas.height / 2 - ((p[1] - s.center[1]) / span) * (canvas.height / 2),
  ];
  ctx.strokeStyle = "#1f77b4";
  ctx.beginPath();
  s.curve.forEach((p, i) => (i ? ctx.lineTo(...map(p)) : ctx.moveTo(...map(p))));
  ctx.stroke();
  ctx.fillStyle = "#d62728";
  s.holes.forEach((p) => {
    const [x, y] = map(p);
    ctx.fillRect(x - 2, y - 2, 4, 4);
  });
}

function drawEnvelope() {
  const pts = JSON.parse(envelopeCurve(num("env-r"), num("env-kappa"), num("env-i0"), 64));
  const canvas = $("envelope");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const lx = pts.map((p) => Math.log10(p.eps));
  const ly = pts.flatMap((p) => [Math.log10(p.dF), Math.log10(p.dDF)]);
  const [x0, x1, y0, y1] = [Math.min(...lx), Math.max(...lx), Math.min(...ly), Math.max(...ly)];
  const m = 40;
  const px = (x) => m + ((x - x0) / (x1 - x0)) * (canvas.width - 2 * m);
  const py = (y) => canvas.height - m - ((y - y0) / (y1 - y0)) * (canvas.height - 2 * m);
  for (const [key, color] of [["dF", "#1f77b4"], ["dDF", "#2ca02c"]]) {
    ctx.strokeStyle = color;
    ctx.beginPath();
    pts.forEach((p, i) => {
      const xy = [px(Math.log10(p.eps)), py(Math.log10(p[key]))];
      i ? ctx.lineTo(...xy) : ctx.moveTo(...xy);
    });
    ctx.stroke();
    ctx.fillStyle = color;
    ctx.fillText(key, canvas.width - m - 30, key === "dF" ? m : m + 14);
  }
  ctx.fillStyle = "black";
  ctx.fillText(`eps ${pts[0].eps.toExponential(1)}`, m, canvas.height - 10);
  ctx.fillText(`${pts[pts.length - 1].eps.toExponential(1)}`, canvas.width - m - 40, canvas.height - 10);
}

await init();
$("slice-run").onclick = report(drawSlice);
$("section-run").onclick = report(drawSection);
$("env-run").onclick = report(drawEnvelope);
report(drawEnvelope)();
