/** Wire-format geometry received from the layout service, plus hit testing.
 *
 * Coordinates are integers in document space with y growing downward,
 * exactly as serialized by the service.
 */

export interface WireRect {
  type: "rect";
  node: number;
  x: number;
  y: number;
  w: number;
  h: number;
  label: string;
  fill: string;
}

export interface WireSeg {
  type: "seg";
  node: number | null;
  x1: number;
  y1: number;
  x2: number;
  y2: number;
}

export interface WireText {
  type: "text";
  node: number | null;
  x: number;
  y: number;
  text: string;
}

export type WirePrimitive = WireRect | WireSeg | WireText;

export interface WireGeometry {
  primitives: WirePrimitive[];
  width: number;
  height: number;
}

export interface Point {
  x: number;
  y: number;
}

export function rectsOf(geometry: WireGeometry): WireRect[] {
  return geometry.primitives.filter((p): p is WireRect => p.type === "rect");
}

export function segsOf(geometry: WireGeometry): WireSeg[] {
  return geometry.primitives.filter((p): p is WireSeg => p.type === "seg");
}

export function textsOf(geometry: WireGeometry): WireText[] {
  return geometry.primitives.filter((p): p is WireText => p.type === "text");
}

function contains(r: WireRect, p: Point): boolean {
  return p.x >= r.x && p.x <= r.x + r.w && p.y >= r.y && p.y <= r.y + r.h;
}

/** Topmost rect under the point.
 *
 * Rects are painted in primitive order, so the last hit wins; a child
 * box drawn over its parent is therefore picked first.
 */
export function hitTest(geometry: WireGeometry, p: Point): WireRect | null {
  let hit: WireRect | null = null;
  for (const r of rectsOf(geometry)) {
    if (contains(r, p)) {
      hit = r;
    }
  }
  return hit;
}

export function rectOfNode(
  geometry: WireGeometry,
  node: number,
): WireRect | null {
  for (const r of rectsOf(geometry)) {
    if (r.node === node) {
      return r;
    }
  }
  return null;
}
