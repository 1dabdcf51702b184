/** Software rasterizer replaying chart ops onto an RGBA buffer. */

import { Chart, Op } from "./chart.js";
import { glyph, GLYPH_H, GLYPH_W } from "./font.js";

type Rgb = [number, number, number];

function parseColor(hex: string): Rgb {
  const v = parseInt(hex.slice(1), 16);
  return [(v >> 16) & 0xff, (v >> 8) & 0xff, v & 0xff];
}

export class Raster {
  readonly width: number;
  readonly height: number;
  readonly data: Uint8Array;

  constructor(width: number, height: number) {
    this.width = width;
    this.height = height;
    this.data = new Uint8Array(width * height * 4).fill(255);
  }

  private set(x: number, y: number, c: Rgb): void {
    if (x < 0 || y < 0 || x >= this.width || y >= this.height) return;
    const i = (y * this.width + x) * 4;
    this.data[i] = c[0];
    this.data[i + 1] = c[1];
    this.data[i + 2] = c[2];
    this.data[i + 3] = 255;
  }

  fillRect(x: number, y: number, w: number, h: number, c: Rgb): void {
    const x0 = Math.round(x);
    const y0 = Math.round(y);
    const x1 = Math.round(x + w);
    const y1 = Math.round(y + h);
    for (let py = y0; py < y1; py++) {
      for (let px = x0; px < x1; px++) this.set(px, py, c);
    }
  }

  line(
    x1: number,
    y1: number,
    x2: number,
    y2: number,
    c: Rgb,
    width: number,
    dash: boolean,
  ): void {
    let x = Math.round(x1);
    let y = Math.round(y1);
    const xe = Math.round(x2);
    const ye = Math.round(y2);
    const dx = Math.abs(xe - x);
    const dy = -Math.abs(ye - y);
    const sx = x < xe ? 1 : -1;
    const sy = y < ye ? 1 : -1;
    let err = dx + dy;
    let step = 0;
    for (;;) {
      if (!dash || step % 7 < 4) {
        this.set(x, y, c);
        if (width > 1) {
          this.set(x + 1, y, c);
          this.set(x, y + 1, c);
          this.set(x + 1, y + 1, c);
        }
      }
      if (x === xe && y === ye) break;
      const e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
      step++;
    }
  }

  text(
    x: number,
    y: number,
    s: string,
    size: number,
    c: Rgb,
    anchor: "start" | "middle" | "end",
  ): void {
    const scale = size >= 14 ? 2 : 1;
    const adv = (GLYPH_W + 1) * scale;
    const width = s.length > 0 ? s.length * adv - scale : 0;
    let x0 = Math.round(x);
    if (anchor === "middle") x0 -= Math.round(width / 2);
    else if (anchor === "end") x0 -= width;
    const y0 = Math.round(y) - GLYPH_H * scale;
    for (let ci = 0; ci < s.length; ci++) {
      const rows = glyph(s[ci]);
      for (let gy = 0; gy < GLYPH_H; gy++) {
        for (let gx = 0; gx < GLYPH_W; gx++) {
          if ((rows[gy] >> (GLYPH_W - 1 - gx)) & 1) {
            this.fillRect(
              x0 + ci * adv + gx * scale,
              y0 + gy * scale,
              scale,
              scale,
              c,
            );
          }
        }
      }
    }
  }

  apply(op: Op): void {
    switch (op.kind) {
      case "rect":
        this.fillRect(op.x, op.y, op.w, op.h, parseColor(op.fill));
        break;
      case "line":
        this.line(
          op.x1,
          op.y1,
          op.x2,
          op.y2,
          parseColor(op.stroke),
          op.width,
          op.dash ?? false,
        );
        break;
      case "text":
        this.text(op.x, op.y, op.text, op.size, parseColor(op.fill), op.anchor);
        break;
    }
  }
}

export function rasterize(chart: Chart): Raster {
  const r = new Raster(chart.width, chart.height);
  for (const op of chart.ops) r.apply(op);
  return r;
}
