import type { Layout, MapDoc, Point } from './types.js';

export interface LayoutOptions {
  width: number;
  height: number;
  /** Parent anchoring for zoomed maps: non-split landmarks are pinned to
   * their parent positions and sub-roles start at the split landmark. */
  parent?: { layout: Layout; splitRoleId: string };
  iterations?: number;
}

/**
 * Deterministic force layout. Landmarks repel each other, roads attract
 * proportionally to omega, and everything is pulled gently to the center.
 * No randomness: initial positions come from a circle (or from the parent
 * layout), so the same inputs always produce the same picture.
 */
export function layoutMap(doc: MapDoc, opts: LayoutOptions): Layout {
  const { width, height } = opts;
  const n = doc.K;
  const ids = doc.landmark_ids;
  const cx = width / 2;
  const cy = height / 2;
  const radius = 0.33 * Math.min(width, height);

  const pos: Point[] = [];
  const pinned: boolean[] = new Array(n).fill(false);

  if (opts.parent) {
    const { layout: parentLayout, splitRoleId } = opts.parent;
    const anchor = parentLayout.get(splitRoleId) ?? { x: cx, y: cy };
    let subIndex = 0;
    for (let k = 0; k < n; k += 1) {
      const kept = parentLayout.get(ids[k]);
      if (kept) {
        pos.push({ x: kept.x, y: kept.y });
        pinned[k] = true;
      } else {
        // sub-roles fan out around the parent's old position
        const angle = (2 * Math.PI * subIndex) / Math.max(doc.lineage?.child_ids.length ?? 2, 2);
        pos.push({
          x: anchor.x + 18 * Math.cos(angle),
          y: anchor.y + 18 * Math.sin(angle),
        });
        subIndex += 1;
      }
    }
  } else {
    for (let k = 0; k < n; k += 1) {
      const angle = (2 * Math.PI * k) / n - Math.PI / 2;
      pos.push({ x: cx + radius * Math.cos(angle), y: cy + radius * Math.sin(angle) });
    }
  }

  const iterations = opts.iterations ?? 150;
  const repulsion = 6000;
  const spring = 0.02;
  const centering = 0.01;
  for (let step = 0; step < iterations; step += 1) {
    const cool = 1 - step / iterations;
    for (let a = 0; a < n; a += 1) {
      if (pinned[a]) continue;
      let fx = 0;
      let fy = 0;
      for (let b = 0; b < n; b += 1) {
        if (a === b) continue;
        const dx = pos[a].x - pos[b].x;
        const dy = pos[a].y - pos[b].y;
        const d2 = Math.max(dx * dx + dy * dy, 25);
        const d = Math.sqrt(d2);
        fx += (repulsion / d2) * (dx / d);
        fy += (repulsion / d2) * (dy / d);
        const w = Math.max(doc.omega[a][b], doc.omega[b][a]);
        if (w > 0) {
          const rest = 90;
          const pull = spring * w * (d - rest);
          fx -= pull * (dx / d);
          fy -= pull * (dy / d);
        }
      }
      fx += centering * (cx - pos[a].x);
      fy += centering * (cy - pos[a].y);
      const cap = 12 * cool + 0.5;
      const norm = Math.sqrt(fx * fx + fy * fy);
      if (norm > cap) {
        fx = (fx / norm) * cap;
        fy = (fy / norm) * cap;
      }
      pos[a].x = Math.min(Math.max(pos[a].x + fx, 20), width - 20);
      pos[a].y = Math.min(Math.max(pos[a].y + fy, 20), height - 20);
    }
  }

  const layout: Layout = new Map();
  for (let k = 0; k < n; k += 1) {
    layout.set(ids[k], { x: pos[k].x, y: pos[k].y });
  }
  return layout;
}
