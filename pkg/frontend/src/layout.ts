/** Viewport projection.
 *
 * The server layout is the single source of geometric truth; the
 * client only applies a uniform-scale affine map (scale s, offsets
 * tx/ty) to fit the points into the viewport. Pan and zoom compose
 * further affine maps, never recomputed coordinates.
 */

import { NodeDoc } from "./types.js";

export interface Viewport {
  width: number;
  height: number;
  margin: number;
}

export interface AffineMap {
  s: number;
  tx: number;
  ty: number;
}

export function computeAffine(nodes: NodeDoc[], view: Viewport): AffineMap {
  if (nodes.length === 0) {
    return { s: 1, tx: view.width / 2, ty: view.height / 2 };
  }
  const xs = nodes.map((n) => n.x);
  const ys = nodes.map((n) => n.y);
  const minX = Math.min(...xs);
  const maxX = Math.max(...xs);
  const minY = Math.min(...ys);
  const maxY = Math.max(...ys);
  const spanX = maxX - minX;
  const spanY = maxY - minY;
  const innerW = view.width - 2 * view.margin;
  const innerH = view.height - 2 * view.margin;
  let s = 1;
  if (spanX > 0 || spanY > 0) {
    const sx = spanX > 0 ? innerW / spanX : Infinity;
    const sy = spanY > 0 ? innerH / spanY : Infinity;
    s = Math.min(sx, sy);
  }
  const midX = (minX + maxX) / 2;
  const midY = (minY + maxY) / 2;
  return {
    s,
    tx: view.width / 2 - s * midX,
    ty: view.height / 2 - s * midY,
  };
}

export function project(map: AffineMap, x: number, y: number): [number, number] {
  return [map.s * x + map.tx, map.s * y + map.ty];
}
