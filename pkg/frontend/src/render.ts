/** Paints wire geometry onto a 2D canvas context.
 *
 * Draw order is segments, then rectangles, then free-floating labels,
 * so edges never cross box interiors.  Iconified-subtree rects arrive
 * with fill "gray" and are painted solid; text icons carry the label
 * "T" like any other rect label.
 */

import {
  rectsOf,
  segsOf,
  textsOf,
  type WireGeometry,
  type WireRect,
} from "./geometry.js";

/** The subset of CanvasRenderingContext2D the renderer needs. */
export interface Canvas2D {
  fillStyle: string;
  strokeStyle: string;
  font: string;
  textBaseline: string;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
}

export interface RenderOptions {
  margin: number;
  font: string;
  grayFill: string;
  boxFill: string;
  lineColor: string;
  textColor: string;
}

export const DEFAULT_OPTIONS: RenderOptions = {
  margin: 8,
  font: "12px monospace",
  grayFill: "#c8c8c8",
  boxFill: "#ffffff",
  lineColor: "#333333",
  textColor: "#000000",
};

function labelPosition(r: WireRect): { x: number; y: number } {
  return { x: r.x + 4, y: r.y + 4 };
}

export function render(
  geometry: WireGeometry,
  ctx: Canvas2D,
  options: RenderOptions = DEFAULT_OPTIONS,
): void {
  const m = options.margin;
  ctx.clearRect(0, 0, geometry.width + 2 * m, geometry.height + 2 * m);
  ctx.font = options.font;
  ctx.textBaseline = "top";

  ctx.strokeStyle = options.lineColor;
  for (const s of segsOf(geometry)) {
    ctx.beginPath();
    ctx.moveTo(s.x1 + m, s.y1 + m);
    ctx.lineTo(s.x2 + m, s.y2 + m);
    ctx.stroke();
  }

  for (const r of rectsOf(geometry)) {
    ctx.fillStyle = r.fill === "gray" ? options.grayFill : options.boxFill;
    ctx.fillRect(r.x + m, r.y + m, r.w, r.h);
    ctx.strokeRect(r.x + m, r.y + m, r.w, r.h);
    if (r.label) {
      const at = labelPosition(r);
      ctx.fillStyle = options.textColor;
      ctx.fillText(r.label, at.x + m, at.y + m);
    }
  }

  ctx.fillStyle = options.textColor;
  for (const t of textsOf(geometry)) {
    ctx.fillText(t.text, t.x + m, t.y + m);
  }
}
