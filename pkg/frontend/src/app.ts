import { MapServiceClient } from './api.js';
import { assignColors } from './colors.js';
import { layoutMap } from './layout.js';
import { renderBreadcrumb, renderMap } from './render.js';
import { parseCoordsTsv, renderScatterMatrix } from './scatter.js';
import type {
  ColorMap,
  JobStatus,
  Layout,
  LineageNode,
  LineageTree,
  MapDoc,
  SessionInfo,
} from './types.js';

const MAP_W = 760;
const MAP_H = 520;

interface ExplorerState {
  session: SessionInfo | null;
  lineage: LineageTree;
  currentMapId: string | null;
  doc: MapDoc | null;
  coordsText: string | null;
  selected: string | null;
  showWeakRoads: boolean;
  omegaMin: number;
  // hyperparameter panel
  beta: number;
  k: number;
  alpha: number;
  job: JobStatus | null;
  error: string | null;
}

/**
 * Single-page explorer: view the current map, steer zooming, inspect node
 * coordinates. All view state is a pure function of server documents plus
 * the user's selections, so reloading reconstructs the same picture.
 */
export class MapExplorerApp {
  readonly state: ExplorerState = {
    session: null,
    lineage: { roots: [] },
    currentMapId: null,
    doc: null,
    coordsText: null,
    selected: null,
    showWeakRoads: false,
    omegaMin: 0.05,
    beta: 0.002,
    k: 5,
    alpha: 0.5,
    job: null,
    error: null,
  };

  /** Layouts/colors per map id; children anchor to their parent's entries. */
  private layouts = new Map<string, Layout>();
  private colors = new Map<string, ColorMap>();

  constructor(
    private readonly root: HTMLElement,
    readonly client: MapServiceClient,
  ) {}

  async init(): Promise<void> {
    this.state.session = await this.client.getSession();
    this.state.lineage = await this.client.getLineage();
    const latest = this.newestMapId();
    if (latest) {
      await this.showMap(latest);
    } else {
      this.render();
    }
  }

  /** Most recently registered map (ids are m1, m2, ... in creation order). */
  newestMapId(): string | null {
    let best: string | null = null;
    let bestNum = -1;
    const visit = (node: LineageNode) => {
      const num = Number(node.id.replace(/^m/, ''));
      if (num > bestNum) {
        bestNum = num;
        best = node.id;
      }
      node.children.forEach(visit);
    };
    this.state.lineage.roots.forEach(visit);
    return best;
  }

  /** Path of map ids from a root down to the given map. */
  breadcrumbPath(mapId: string): { id: string; k: number }[] {
    const path: { id: string; k: number }[] = [];
    const walk = (node: LineageNode, trail: { id: string; k: number }[]): boolean => {
      const next = [...trail, { id: node.id, k: node.k }];
      if (node.id === mapId) {
        path.push(...next);
        return true;
      }
      return node.children.some((c) => walk(c, next));
    };
    this.state.lineage.roots.some((r) => walk(r, []));
    return path;
  }

  private parentIdOf(mapId: string): string | null {
    const path = this.breadcrumbPath(mapId);
    return path.length > 1 ? path[path.length - 2].id : null;
  }

  /** Compute (and cache) layout + colors, anchoring to the parent chain. */
  private async ensureVisuals(mapId: string, doc: MapDoc): Promise<void> {
    if (this.layouts.has(mapId)) return;
    const parentId = this.parentIdOf(mapId);
    if (parentId && doc.lineage) {
      if (!this.layouts.has(parentId)) {
        const parentDoc = await this.client.getMap(parentId);
        await this.ensureVisuals(parentId, parentDoc);
      }
      this.layouts.set(mapId, layoutMap(doc, {
        width: MAP_W,
        height: MAP_H,
        parent: {
          layout: this.layouts.get(parentId)!,
          splitRoleId: doc.lineage.split_role_id,
        },
      }));
      this.colors.set(mapId, assignColors(doc.landmark_ids, this.colors.get(parentId)));
    } else {
      this.layouts.set(mapId, layoutMap(doc, { width: MAP_W, height: MAP_H }));
      this.colors.set(mapId, assignColors(doc.landmark_ids));
    }
  }

  async showMap(mapId: string): Promise<void> {
    this.state.lineage = await this.client.getLineage();
    const doc = await this.client.getMap(mapId);
    const coords = await this.client.getCoordsTsv(mapId);
    await this.ensureVisuals(mapId, doc);
    this.state.currentMapId = mapId;
    this.state.doc = doc;
    this.state.coordsText = coords;
    this.state.selected = null;
    this.state.error = null;
    this.render();
  }

  selectLandmark(id: string): void {
    this.state.selected = this.state.selected === id ? null : id;
    this.render();
  }

  async requestDiscover(): Promise<void> {
    try {
      const jobId = await this.client.postDiscover(this.state.k, {
        alpha: this.state.alpha,
      });
      await this.trackJob(jobId);
    } catch (err) {
      this.state.error = String(err);
      this.render();
    }
  }

  /** Zoom into the currently selected landmark. */
  async requestZoom(): Promise<void> {
    const { doc, selected, currentMapId } = this.state;
    if (!doc || !selected || !currentMapId) return;
    const roleIndex = doc.landmark_ids.indexOf(selected);
    if (roleIndex < 0) return;
    try {
      const jobId = await this.client.postZoom(currentMapId, roleIndex, this.state.beta);
      await this.trackJob(jobId);
    } catch (err) {
      this.state.error = String(err);
      this.render();
    }
  }

  private async trackJob(jobId: string): Promise<void> {
    const job = await this.client.waitForJob(jobId, {
      onProgress: (j) => {
        this.state.job = j;
        this.renderStatus();
      },
    });
    this.state.job = job;
    if (job.status === 'done' && job.map_id) {
      await this.showMap(job.map_id);
    } else if (job.status === 'failed') {
      this.state.error = job.error ?? 'job failed';
      this.render();
    }
  }

  toggleWeakRoads(): void {
    this.state.showWeakRoads = !this.state.showWeakRoads;
    this.render();
  }

  // -- rendering --------------------------------------------------------------

  private section(className: string): HTMLElement {
    const el = document.createElement('div');
    el.className = className;
    this.root.appendChild(el);
    return el;
  }

  render(): void {
    this.root.innerHTML = '';
    this.renderToolbar();
    const crumb = this.section('breadcrumb');
    if (this.state.currentMapId) {
      renderBreadcrumb(crumb, this.breadcrumbPath(this.state.currentMapId), (id) => {
        void this.showMap(id);
      });
    }
    this.renderStatus();
    const mapPane = this.section('map-pane');
    if (this.state.doc && this.state.currentMapId) {
      renderMap(mapPane, this.state.doc, {
        width: MAP_W,
        height: MAP_H,
        layout: this.layouts.get(this.state.currentMapId)!,
        colors: this.colors.get(this.state.currentMapId)!,
        omegaMin: this.state.omegaMin,
        showWeakRoads: this.state.showWeakRoads,
        selected: this.state.selected,
        onLandmarkClick: (_role, id) => this.selectLandmark(id),
      });
    } else {
      mapPane.textContent = this.state.session?.graph_loaded
        ? 'No map yet; run discovery from the panel above.'
        : 'No graph loaded in this session.';
    }
    const scatterPane = this.section('scatter-pane');
    if (this.state.coordsText) {
      const heading = document.createElement('h3');
      heading.textContent = 'Node coordinates by landmark pair';
      scatterPane.appendChild(heading);
      const panels = document.createElement('div');
      panels.className = 'scatter-matrix';
      scatterPane.appendChild(panels);
      renderScatterMatrix(panels, parseCoordsTsv(this.state.coordsText));
    }
  }

  private renderToolbar(): void {
    const bar = this.section('toolbar');

    const num = (label: string, value: number, step: string,
                 onChange: (v: number) => void): HTMLElement => {
      const wrap = document.createElement('label');
      wrap.className = 'field';
      wrap.textContent = label + ' ';
      const input = document.createElement('input');
      input.type = 'number';
      input.step = step;
      input.value = String(value);
      input.addEventListener('change', () => onChange(Number(input.value)));
      wrap.appendChild(input);
      bar.appendChild(wrap);
      return wrap;
    };

    num('K', this.state.k, '1', (v) => { this.state.k = v; });
    num('alpha', this.state.alpha, '0.1', (v) => { this.state.alpha = v; });
    num('beta', this.state.beta, '0.001', (v) => { this.state.beta = v; });

    const discover = document.createElement('button');
    discover.className = 'discover-btn';
    discover.textContent = 'Discover roles';
    discover.addEventListener('click', () => { void this.requestDiscover(); });
    bar.appendChild(discover);

    const zoomBtn = document.createElement('button');
    zoomBtn.className = 'zoom-btn';
    zoomBtn.textContent = this.state.selected
      ? `Zoom into ${this.state.selected}`
      : 'Zoom (select a landmark)';
    zoomBtn.disabled = !this.state.selected;
    zoomBtn.addEventListener('click', () => { void this.requestZoom(); });
    bar.appendChild(zoomBtn);

    const toggle = document.createElement('label');
    toggle.className = 'field weak-roads-toggle';
    const box = document.createElement('input');
    box.type = 'checkbox';
    box.checked = this.state.showWeakRoads;
    box.addEventListener('change', () => this.toggleWeakRoads());
    toggle.appendChild(box);
    toggle.appendChild(document.createTextNode(' show weak roads'));
    bar.appendChild(toggle);
  }

  private renderStatus(): void {
    let status = this.root.querySelector<HTMLElement>('.status');
    if (!status) {
      status = document.createElement('div');
      status.className = 'status';
      const crumb = this.root.querySelector('.breadcrumb');
      crumb?.after(status);
    }
    const { job, error } = this.state;
    if (error) {
      status.textContent = `error: ${error}`;
    } else if (job && (job.status === 'queued' || job.status === 'running')) {
      status.textContent = `${job.kind} ${job.status}: ${(job.progress * 100).toFixed(0)}%`;
    } else {
      status.textContent = '';
    }
  }
}

/** Browser entry point (served by the map service). */
export function mount(): void {
  const root = document.getElementById('app');
  if (root) {
    const app = new MapExplorerApp(root, new MapServiceClient(''));
    void app.init();
  }
}
