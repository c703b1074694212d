import type { JobStatus, LineageTree, MapDoc, SessionInfo } from './types.js';

export interface WaitOptions {
  pollMs?: number;
  timeoutMs?: number;
  onProgress?: (job: JobStatus) => void;
}

/** Thin fetch client for the map service HTTP API. */
export class MapServiceClient {
  constructor(private readonly baseUrl: string = '') {}

  private async getJson<T>(path: string): Promise<T> {
    const resp = await fetch(this.baseUrl + path);
    if (!resp.ok) {
      throw new Error(`GET ${path} failed: ${resp.status}`);
    }
    return (await resp.json()) as T;
  }

  private async postJson<T>(path: string, body: unknown): Promise<T> {
    const resp = await fetch(this.baseUrl + path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      let message = `POST ${path} failed: ${resp.status}`;
      try {
        const err = (await resp.json()) as { message?: string };
        if (err.message) message += ` (${err.message})`;
      } catch {
        /* non-JSON error body */
      }
      throw new Error(message);
    }
    return (await resp.json()) as T;
  }

  getSession(): Promise<SessionInfo> {
    return this.getJson('/api/session');
  }

  getLineage(): Promise<LineageTree> {
    return this.getJson('/api/lineage');
  }

  getMap(mapId: string): Promise<MapDoc> {
    return this.getJson(`/api/maps/${mapId}`);
  }

  async getCoordsTsv(mapId: string): Promise<string> {
    const resp = await fetch(`${this.baseUrl}/api/maps/${mapId}/coords`);
    if (!resp.ok) {
      throw new Error(`GET coords failed: ${resp.status}`);
    }
    return resp.text();
  }

  getJob(jobId: string): Promise<JobStatus> {
    return this.getJson(`/api/jobs/${jobId}`);
  }

  async postDiscover(
    k: number,
    hyperparams: Record<string, number | string> = {},
  ): Promise<string> {
    const out = await this.postJson<{ job_id: string }>('/api/discover', {
      k,
      hyperparams,
    });
    return out.job_id;
  }

  async postZoom(mapId: string, splitRole: number, beta: number): Promise<string> {
    const out = await this.postJson<{ job_id: string }>(
      `/api/maps/${mapId}/zoom`,
      { split_role: splitRole, beta },
    );
    return out.job_id;
  }

  /** Poll a job until it settles; resolves with the final status. */
  async waitForJob(jobId: string, opts: WaitOptions = {}): Promise<JobStatus> {
    const pollMs = opts.pollMs ?? 250;
    const deadline = Date.now() + (opts.timeoutMs ?? 300_000);
    for (;;) {
      const job = await this.getJob(jobId);
      opts.onProgress?.(job);
      if (job.status === 'done' || job.status === 'failed') {
        return job;
      }
      if (Date.now() > deadline) {
        throw new Error(`job ${jobId} timed out`);
      }
      await new Promise((resolve) => setTimeout(resolve, pollMs));
    }
  }
}
