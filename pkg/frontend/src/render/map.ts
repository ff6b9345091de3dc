// Belief map rendering: place boxes left to right with directed arrows,
// group-colored space term ellipses beneath each place, snippets as hover
// tooltips. Every label is a verbatim server value.

import type { MapDoc } from "../api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export const GROUP_PALETTE = [
  "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
  "#76b7b2", "#edc948", "#9c755f",
];

export function groupColor(groups: string[], group: string): string {
  const index = groups.indexOf(group);
  return GROUP_PALETTE[(index >= 0 ? index : groups.length) % GROUP_PALETTE.length];
}

export interface MapCallbacks {
  onPlaceClick?: (sequence: number) => void;
  onTermClick?: (sequence: number, group: string, term: string) => void;
}

function el(name: string, attrs: Record<string, string>): SVGElement {
  const node = document.createElementNS(SVG_NS, name);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  return node;
}

export function renderMap(container: HTMLElement, doc: MapDoc,
                          groups: string[], callbacks: MapCallbacks = {}): void {
  container.textContent = "";
  const colWidth = 190;
  const placeY = 40;
  const rowHeight = 26;
  const maxSpaces = Math.max(1, ...groups.map(
    (g) => doc.spaces.filter((s) => s.group === g).length));
  const height = placeY + 60 + groups.length * 0 +
    (groups.length * 3 + 2) * rowHeight;
  const width = Math.max(1, doc.places.length) * colWidth + 40;

  const svg = el("svg", {
    width: String(width), height: String(height),
    viewBox: `0 0 ${width} ${height}`, role: "img",
  });
  svg.setAttribute("data-testid", "belief-map");

  const snippetFor = new Map<string, string>();
  for (const snip of doc.snippets) {
    const display = snip.truncated ? snip.text + "…" : snip.text;
    snippetFor.set(`${snip.sequence}:${snip.group}`,
                   `${snip.author}: ${display}`);
  }

  doc.places.forEach((place, i) => {
    const x = 20 + i * colWidth;
    const group = el("g", { "data-testid": `place-${place.sequence}` });
    const box = el("rect", {
      x: String(x), y: String(placeY), width: "160", height: "34",
      rx: "4", fill: "#ffffff", stroke: "#333333", "stroke-width": "1.5",
      cursor: "pointer",
    });
    const label = el("text", {
      x: String(x + 80), y: String(placeY + 21), "text-anchor": "middle",
      "font-size": "12", cursor: "pointer",
    });
    label.textContent = place.label;
    label.setAttribute("data-testid", `place-label-${place.sequence}`);
    const open = () => callbacks.onPlaceClick?.(place.sequence);
    box.addEventListener("click", open);
    label.addEventListener("click", open);
    group.append(box, label);

    if (i + 1 < doc.places.length) {
      const lineY = placeY + 17;
      group.append(el("line", {
        x1: String(x + 160), y1: String(lineY),
        x2: String(x + colWidth - 6), y2: String(lineY),
        stroke: "#333333", "stroke-width": "1.5",
        "marker-end": "url(#arrowhead)",
      }));
    }

    let y = placeY + 60;
    for (const g of groups) {
      const spaces = doc.spaces.find(
        (s) => s.sequence === place.sequence && s.group === g);
      if (!spaces) continue;
      const color = groupColor(groups, g);
      const snippet = snippetFor.get(`${place.sequence}:${g}`);
      for (const [term] of spaces.terms.entries) {
        const node = el("g", {
          "data-testid": `space-${place.sequence}-${g}-${term}`,
          cursor: "pointer",
        });
        const ellipse = el("ellipse", {
          cx: String(x + 80), cy: String(y + 9), rx: "78", ry: "11",
          fill: color, "fill-opacity": "0.25", stroke: color,
        });
        const text = el("text", {
          x: String(x + 80), y: String(y + 13), "text-anchor": "middle",
          "font-size": "11", fill: "#222222",
        });
        text.textContent = `${g}: ${term}`;
        if (snippet) {
          const title = document.createElementNS(SVG_NS, "title");
          title.textContent = snippet;
          node.append(title);
        }
        node.append(ellipse, text);
        node.addEventListener("click",
          () => callbacks.onTermClick?.(place.sequence, g, term));
        group.append(node);
        y += rowHeight;
      }
    }
    svg.append(group);
  });

  const defs = el("defs", {});
  const marker = el("marker", {
    id: "arrowhead", markerWidth: "8", markerHeight: "8",
    refX: "7", refY: "4", orient: "auto",
  });
  marker.append(el("path", { d: "M0,0 L8,4 L0,8 z", fill: "#333333" }));
  defs.append(marker);
  svg.prepend(defs);
  void maxSpaces;
  container.append(svg);
}
