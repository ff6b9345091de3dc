// Whisker chart of the per-k label differences. All five summary numbers
// per k come straight from the server report; this module only maps them to
// pixels and prints them verbatim.

import type { ConvergenceDoc } from "../api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

function el(name: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

export function renderConvergence(container: HTMLElement,
                                  doc: ConvergenceDoc | null): void {
  container.textContent = "";
  if (!doc || doc.per_k.length === 0) {
    const empty = document.createElement("p");
    empty.dataset.testid = "convergence-empty";
    empty.textContent =
      "Convergence needs at least two groups; nothing to compare.";
    container.append(empty);
    return;
  }
  const colWidth = 90;
  const top = 20;
  const plotHeight = 180;
  const axisMax = Math.max(1, ...doc.per_k.map((ks) => ks.max));
  const yFor = (value: number) => top + plotHeight * (1 - value / axisMax);
  const width = doc.per_k.length * colWidth + 60;
  const svg = el("svg", {
    width: String(width), height: String(top + plotHeight + 50),
    "data-testid": "convergence-chart",
  });

  doc.per_k.forEach((ks, i) => {
    const cx = 50 + i * colWidth + colWidth / 2;
    const group = el("g", { "data-testid": `whisker-${ks.k}` });
    group.append(el("line", {
      x1: String(cx), y1: String(yFor(ks.min)),
      x2: String(cx), y2: String(yFor(ks.max)),
      stroke: "#333333",
    }));
    const boxTop = yFor(ks.q3);
    const boxBottom = yFor(ks.q1);
    group.append(el("rect", {
      x: String(cx - 18), y: String(boxTop), width: "36",
      height: String(Math.max(1, boxBottom - boxTop)),
      fill: "#4e79a7", "fill-opacity": "0.35", stroke: "#333333",
    }));
    group.append(el("line", {
      x1: String(cx - 18), y1: String(yFor(ks.median)),
      x2: String(cx + 18), y2: String(yFor(ks.median)),
      stroke: "#333333", "stroke-width": "2",
    }));
    const label = el("text", {
      x: String(cx), y: String(top + plotHeight + 18),
      "text-anchor": "middle", "font-size": "12",
    });
    label.textContent = `diff_${ks.k}`;
    const stats = el("text", {
      x: String(cx), y: String(top + plotHeight + 34),
      "text-anchor": "middle", "font-size": "10",
    });
    stats.setAttribute("data-testid", `whisker-stats-${ks.k}`);
    stats.textContent =
      `${ks.min}/${ks.q1}/${ks.median}/${ks.q3}/${ks.max}`;
    group.append(label, stats);
    svg.append(group);
  });
  container.append(svg);
}
