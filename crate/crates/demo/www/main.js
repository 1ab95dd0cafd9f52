import init, { interpolate, frameAt, timeOf, visibilityGrid } from "./pkg/framewise_demo.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function box(prefix) {
  const [x0, y0, x1, y1] = [0, 1, 2, 3].map((i) => num(prefix + i));
  return { kind: "bounding_box", coords: { x_min: x0, y_min: y0, x_max: x1, y_max: y1 } };
}

function fail(el, e) {
  el.innerHTML = `<span class="error">${e.message ?? e}</span>`;
}

function drawBox(ctx, c, style, dashed) {
  const { width: w, height: h } = ctx.canvas;
  ctx.strokeStyle = style;
  ctx.setLineDash(dashed ? [5, 4] : []);
  ctx.strokeRect(c.x_min * w, c.y_min * h, (c.x_max - c.x_min) * w, (c.y_max - c.y_min) * h);
}

function renderInterpolation() {
  const gap = Math.max(1, Math.floor(num("gap")));
  const slider = $("frame");
  slider.max = gap;
  const frame = Math.min(num("frame"), gap);
  $("frame-label").textContent = frame;
  const a = box("a"), b = box("b");
  const ctx = $("canvas").getContext("2d");
  ctx.clearRect(0, 0, ctx.canvas.width, ctx.canvas.height);
  try {
    const shape = JSON.parse(interpolate(JSON.stringify(a), JSON.stringify(b), gap, frame));
    drawBox(ctx, a.coords, "#999", true);
    drawBox(ctx, b.coords, "#999", true);
    ctx.lineWidth = 2;
    drawBox(ctx, shape.coords, "#c03", false);
    ctx.lineWidth = 1;
    const c = shape.coords;
    $("interp-out").innerHTML = `frame ${frame}: <code>[${[c.x_min, c.y_min, c.x_max, c.y_max].map((v) => v.toFixed(4)).join(", ")}]</code>`;
  } catch (e) {
    fail($("interp-out"), e);
  }
}

function renderTimebase() {
  const [n, d] = $("fps").value.split("/").map(Number);
  try {
    const frame = frameAt(num("seconds"), n, d);
    const t = timeOf(frame, n, d);
    $("time-out").innerHTML = `nearest frame <b>${frame}</b>, which starts at ${t.toFixed(6)} s`;
  } catch (e) {
    fail($("time-out"), e);
  }
}

function renderGrid() {
  const level = Math.max(0, Math.floor(num("level")));
  const maxLevel = Math.max(3, level + 1);
  try {
    const rows = JSON.parse(visibilityGrid(level, maxLevel));
    const head = rows[0].map((_, l) => `<th>video level ${l}</th>`).join("");
    const body = rows
      .map((row, assigned) =>
        `<tr><th>${assigned ? "assigned" : "not assigned"}</th>` +
        row.map((v) => `<td class="${v ? "yes" : "no"}">${v ? "visible" : "hidden"}</td>`).join("") +
        "</tr>")
      .join("");
    $("grid").innerHTML = `<table><tr><th></th>${head}</tr>${body}</table>`;
  } catch (e) {
    fail($("grid"), e);
  }
}

await init();
for (const id of ["a0", "a1", "a2", "a3", "b0", "b1", "b2", "b3", "gap", "frame"]) {
  $(id).addEventListener("input", renderInterpolation);
}
$("seconds").addEventListener("input", renderTimebase);
$("fps").addEventListener("change", renderTimebase);
$("level").addEventListener("input", renderGrid);
renderInterpolation();
renderTimebase();
renderGrid();
