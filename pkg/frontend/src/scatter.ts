const SVG_NS = 'http://www.w3.org/2000/svg';

export interface Coords {
  landmarkIds: string[];
  /** rows = nodes, columns = landmarks */
  values: number[][];
}

/** Parse the node-coordinate TSV (header row = landmark ids). */
export function parseCoordsTsv(text: string): Coords {
  const lines = text.trim().split('\n');
  const landmarkIds = lines[0].split('\t');
  const values = lines.slice(1).map((line) => line.split('\t').map(Number));
  return { landmarkIds, values };
}

export interface ScatterOptions {
  size?: number;
  /** Restrict to these axis pairs; default is every pair k < l. */
  pairs?: [number, number][];
}

/** One scatter panel: node memberships along two landmark axes. */
export function renderScatterPanel(
  container: HTMLElement,
  coords: Coords,
  xAxis: number,
  yAxis: number,
  size = 130,
): SVGSVGElement {
  const pad = 18;
  const svg = document.createElementNS(SVG_NS, 'svg') as SVGSVGElement;
  svg.setAttribute('class', 'scatter-panel');
  svg.setAttribute('width', String(size));
  svg.setAttribute('height', String(size));
  svg.dataset.xAxis = coords.landmarkIds[xAxis];
  svg.dataset.yAxis = coords.landmarkIds[yAxis];

  let maxVal = 0;
  for (const row of coords.values) {
    maxVal = Math.max(maxVal, row[xAxis], row[yAxis]);
  }
  const scale = (size - 2 * pad) / (maxVal > 0 ? maxVal : 1);

  const frame = document.createElementNS(SVG_NS, 'rect');
  frame.setAttribute('class', 'frame');
  frame.setAttribute('x', String(pad));
  frame.setAttribute('y', String(pad));
  frame.setAttribute('width', String(size - 2 * pad));
  frame.setAttribute('height', String(size - 2 * pad));
  svg.appendChild(frame);

  for (const row of coords.values) {
    const pt = document.createElementNS(SVG_NS, 'circle');
    pt.setAttribute('class', 'pt');
    pt.setAttribute('cx', (pad + row[xAxis] * scale).toFixed(2));
    pt.setAttribute('cy', (size - pad - row[yAxis] * scale).toFixed(2));
    pt.setAttribute('r', '1.8');
    svg.appendChild(pt);
  }

  const xLabel = document.createElementNS(SVG_NS, 'text');
  xLabel.setAttribute('class', 'axis-label x');
  xLabel.setAttribute('x', String(size / 2));
  xLabel.setAttribute('y', String(size - 4));
  xLabel.setAttribute('text-anchor', 'middle');
  xLabel.textContent = coords.landmarkIds[xAxis];
  svg.appendChild(xLabel);

  const yLabel = document.createElementNS(SVG_NS, 'text');
  yLabel.setAttribute('class', 'axis-label y');
  yLabel.setAttribute('x', '10');
  yLabel.setAttribute('y', String(size / 2));
  yLabel.setAttribute('text-anchor', 'middle');
  yLabel.setAttribute('transform', `rotate(-90 10 ${size / 2})`);
  yLabel.textContent = coords.landmarkIds[yAxis];
  svg.appendChild(yLabel);

  container.appendChild(svg);
  return svg;
}

/** Pairwise scatter-matrix view over all landmark pairs. */
export function renderScatterMatrix(
  container: HTMLElement,
  coords: Coords,
  opts: ScatterOptions = {},
): void {
  container.innerHTML = '';
  const k = coords.landmarkIds.length;
  const pairs: [number, number][] = opts.pairs
    ?? Array.from({ length: k }, (_, a) => a)
      .flatMap((a) => Array.from({ length: k - a - 1 }, (_, j): [number, number] => [a, a + j + 1]));
  for (const [x, y] of pairs) {
    renderScatterPanel(container, coords, x, y, opts.size ?? 130);
  }
}
