import { Chart, Op } from "./chart.js";

const fmt = (v: number) => {
  const s = v.toFixed(2);
  return s === "-0.00" ? "0.00" : s;
};

function esc(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;");
}

function opSvg(op: Op): string {
  switch (op.kind) {
    case "rect":
      return (
        `<rect x="${fmt(op.x)}" y="${fmt(op.y)}" width="${fmt(op.w)}" ` +
        `height="${fmt(op.h)}" fill="${op.fill}"/>`
      );
    case "line": {
      const dash = op.dash ? ' stroke-dasharray="4 3"' : "";
      return (
        `<line x1="${fmt(op.x1)}" y1="${fmt(op.y1)}" x2="${fmt(op.x2)}" ` +
        `y2="${fmt(op.y2)}" stroke="${op.stroke}" ` +
        `stroke-width="${op.width}"${dash}/>`
      );
    }
    case "text":
      return (
        `<text x="${fmt(op.x)}" y="${fmt(op.y)}" font-size="${op.size}" ` +
        `font-family="sans-serif" fill="${op.fill}" ` +
        `text-anchor="${op.anchor}">${esc(op.text)}</text>`
      );
  }
}

export function chartToSvg(chart: Chart): string {
  const lines = [
    `<svg xmlns="http://www.w3.org/2000/svg" width="${chart.width}" ` +
      `height="${chart.height}" viewBox="0 0 ${chart.width} ${chart.height}">`,
  ];
  for (const op of chart.ops) lines.push(opSvg(op));
  lines.push("</svg>");
  return lines.join("\n") + "\n";
}
