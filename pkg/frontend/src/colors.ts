import type { ColorMap } from './types.js';

/** Categorical palette; hues stay readable on the light background. */
export const PALETTE = [
  '#4e79a7', '#f28e2b', '#e15759', '#76b7b2', '#59a14f', '#edc948',
  '#b07aa1', '#ff9da7', '#9c755f', '#bab0ac', '#2f4b7c', '#a05195',
];

/**
 * Assign landmark colors. Ids that already have a color in the parent map
 * keep it (visual continuity across zooms); new ids take the next palette
 * hue not used by the kept ones.
 */
export function assignColors(ids: string[], parent?: ColorMap): ColorMap {
  const colors: ColorMap = new Map();
  const used = new Set<string>();
  for (const id of ids) {
    const kept = parent?.get(id);
    if (kept) {
      colors.set(id, kept);
      used.add(kept);
    }
  }
  let next = 0;
  for (const id of ids) {
    if (colors.has(id)) continue;
    while (next < PALETTE.length && used.has(PALETTE[next])) next += 1;
    const color = PALETTE[next % PALETTE.length];
    next += 1;
    colors.set(id, color);
    used.add(color);
  }
  return colors;
}
