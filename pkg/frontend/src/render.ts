import type { ColorMap, Layout, MapDoc } from './types.js';

const SVG_NS = 'http://www.w3.org/2000/svg';

export interface RenderOptions {
  width: number;
  height: number;
  layout: Layout;
  colors: ColorMap;
  /** Roads with omega below this are hidden (class "weak") unless
   * showWeakRoads is on; omega = 0 roads are never rendered. */
  omegaMin: number;
  showWeakRoads?: boolean;
  selected?: string | null;
  onLandmarkClick?: (roleIndex: number, landmarkId: string) => void;
}

/** Top attributes of landmark k by psi, as "name:0.97" strings. */
export function tooltipLines(doc: MapDoc, k: number, top = 3): string[] {
  const order = doc.attr_names
    .map((_, i) => i)
    .sort((a, b) => doc.psi[k][b] - doc.psi[k][a])
    .slice(0, top);
  return order.map((i) => `${doc.attr_names[i]}:${doc.psi[k][i].toFixed(2)}`);
}

/** Population of each landmark = number of nodes with that main role. */
export function populations(doc: MapDoc): number[] {
  const counts = new Array<number>(doc.K).fill(0);
  for (const role of doc.main_role) counts[role] += 1;
  return counts;
}

export function glyphRadius(population: number, maxPopulation: number): number {
  const frac = maxPopulation > 0 ? population / maxPopulation : 0;
  return 10 + 20 * Math.sqrt(frac);
}

/** Render the landmark graph as SVG inside the container. */
export function renderMap(container: HTMLElement, doc: MapDoc, opts: RenderOptions): void {
  container.innerHTML = '';
  const svg = document.createElementNS(SVG_NS, 'svg');
  svg.setAttribute('class', 'map-view');
  svg.setAttribute('viewBox', `0 0 ${opts.width} ${opts.height}`);
  svg.setAttribute('width', String(opts.width));
  svg.setAttribute('height', String(opts.height));

  const roads = document.createElementNS(SVG_NS, 'g');
  roads.setAttribute('class', 'roads');
  for (let k = 0; k < doc.K; k += 1) {
    for (let l = k; l < doc.K; l += 1) {
      const w = Math.max(doc.omega[k][l], doc.omega[l][k]);
      if (w <= 0) continue; // an omega = 0 road does not exist
      const a = opts.layout.get(doc.landmark_ids[k])!;
      const b = opts.layout.get(doc.landmark_ids[l])!;
      const line = document.createElementNS(SVG_NS, 'line');
      line.setAttribute('class', 'road' + (w < opts.omegaMin ? ' weak' : ''));
      if (k === l) {
        // self-road: draw a small loop marker above the landmark
        line.setAttribute('x1', String(a.x - 6));
        line.setAttribute('y1', String(a.y - 14));
        line.setAttribute('x2', String(a.x + 6));
        line.setAttribute('y2', String(a.y - 14));
      } else {
        line.setAttribute('x1', String(a.x));
        line.setAttribute('y1', String(a.y));
        line.setAttribute('x2', String(b.x));
        line.setAttribute('y2', String(b.y));
      }
      line.setAttribute('stroke-width', String(Math.max(8 * w, 0.75)));
      line.dataset.omega = w.toFixed(4);
      if (w < opts.omegaMin && !opts.showWeakRoads) {
        line.setAttribute('style', 'display:none');
      }
      roads.appendChild(line);
    }
  }
  svg.appendChild(roads);

  const pops = populations(doc);
  const maxPop = Math.max(...pops, 1);
  const glyphs = document.createElementNS(SVG_NS, 'g');
  glyphs.setAttribute('class', 'landmarks');
  for (let k = 0; k < doc.K; k += 1) {
    const id = doc.landmark_ids[k];
    const p = opts.layout.get(id)!;
    const group = document.createElementNS(SVG_NS, 'g');
    group.setAttribute('class', 'landmark' + (opts.selected === id ? ' selected' : ''));
    group.dataset.id = id;
    group.dataset.roleIndex = String(k);

    const circle = document.createElementNS(SVG_NS, 'circle');
    circle.setAttribute('cx', String(p.x));
    circle.setAttribute('cy', String(p.y));
    circle.setAttribute('r', glyphRadius(pops[k], maxPop).toFixed(2));
    circle.setAttribute('fill', opts.colors.get(id) ?? '#999');

    const title = document.createElementNS(SVG_NS, 'title');
    title.textContent = [id, ...tooltipLines(doc, k)].join('\n');

    const label = document.createElementNS(SVG_NS, 'text');
    label.setAttribute('x', String(p.x));
    label.setAttribute('y', String(p.y + 4));
    label.setAttribute('text-anchor', 'middle');
    label.textContent = `${id} (${pops[k]})`;

    group.appendChild(circle);
    group.appendChild(title);
    group.appendChild(label);
    if (opts.onLandmarkClick) {
      group.addEventListener('click', () => opts.onLandmarkClick!(k, id));
    }
    glyphs.appendChild(group);
  }
  svg.appendChild(glyphs);
  container.appendChild(svg);
}

/** Breadcrumb of map ids from the root to the current map. */
export function renderBreadcrumb(
  container: HTMLElement,
  path: { id: string; k: number }[],
  onNavigate: (mapId: string) => void,
): void {
  container.innerHTML = '';
  path.forEach((entry, i) => {
    if (i > 0) {
      const sep = document.createElement('span');
      sep.className = 'crumb-sep';
      sep.textContent = ' › ';
      container.appendChild(sep);
    }
    const link = document.createElement('a');
    link.className = 'crumb' + (i === path.length - 1 ? ' current' : '');
    link.textContent = `${entry.id} (K=${entry.k})`;
    link.href = '#';
    link.addEventListener('click', (ev) => {
      ev.preventDefault();
      onNavigate(entry.id);
    });
    container.appendChild(link);
  });
}
