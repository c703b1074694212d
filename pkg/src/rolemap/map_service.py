"""HTTP facade for the interactive explorer.

One graph per server session, loaded at startup. Discovery and zooming run
as asynchronous jobs on a single worker thread (one optimization at a time;
others queue), so status queries never block behind a long fit. Map
documents are stored as canonical JSON bytes and served verbatim, byte-equal
to what the CLI writes for the same inputs and seed.
"""

from __future__ import annotations

import queue
import threading
from dataclasses import asdict, dataclass, field

from fastapi import FastAPI, HTTPException, Request
from fastapi.responses import JSONResponse, PlainTextResponse, Response
from pydantic import BaseModel

from .cartographer import ZoomSpec, build_map, coords_tsv, map_doc, zoom
from .optimizer import fit
from .role_model import Hyperparams, canon_json_bytes


@dataclass
class MapRecord:
    map_id: str
    doc_bytes: bytes
    network_map: object
    params: object
    hyperparams: Hyperparams
    parent_id: str | None = None
    split_role: int | None = None
    children: list = field(default_factory=list)


class SessionStore:
    """Registry of maps, lineage, and the in-flight job table."""

    def __init__(self, graph=None):
        self.graph = graph
        self.maps = {}
        self.jobs = {}
        self._lock = threading.Lock()
        self._queue = queue.Queue()
        self._counter = 0
        self._worker = threading.Thread(target=self._worker_loop, daemon=True)
        self._worker.start()

    def _next_id(self, prefix):
        with self._lock:
            self._counter += 1
            return f"{prefix}{self._counter}"

    # -- job submission -----------------------------------------------------

    def submit_discover(self, k, hyper):
        if self.graph is None:
            raise LookupError("no graph loaded in this session")
        if k < 1 or k >= self.graph.n_nodes:
            raise ValueError(f"k must lie in [1, N-1], got {k}")
        job_id = self._next_id("j")
        with self._lock:
            self.jobs[job_id] = {"id": job_id, "kind": "discover",
                                 "status": "queued", "progress": 0.0,
                                 "map_id": None, "error": None}
        self._queue.put(("discover", job_id, {"k": k, "hyper": hyper}))
        return job_id

    def submit_zoom(self, map_id, split_role, beta, n_subroles=2):
        with self._lock:
            rec = self.maps.get(map_id)
        if rec is None:
            raise KeyError(f"unknown map {map_id!r}")
        if not 0 <= split_role < rec.params.n_roles:
            raise ValueError(f"split role {split_role} out of range for "
                             f"K={rec.params.n_roles}")
        if beta < 0:
            raise ValueError("beta must be nonnegative")
        job_id = self._next_id("j")
        with self._lock:
            self.jobs[job_id] = {"id": job_id, "kind": "zoom",
                                 "status": "queued", "progress": 0.0,
                                 "map_id": None, "error": None}
        self._queue.put(("zoom", job_id, {"parent_id": map_id,
                                          "split_role": split_role,
                                          "beta": beta,
                                          "n_subroles": n_subroles}))
        return job_id

    # -- worker ---------------------------------------------------------------

    def _worker_loop(self):
        while True:
            kind, job_id, payload = self._queue.get()
            with self._lock:
                self.jobs[job_id]["status"] = "running"
            try:
                if kind == "discover":
                    rec = self._run_discover(job_id, **payload)
                else:
                    rec = self._run_zoom(job_id, **payload)
                with self._lock:
                    self.maps[rec.map_id] = rec
                    if rec.parent_id:
                        self.maps[rec.parent_id].children.append(rec.map_id)
                    self.jobs[job_id].update(status="done", progress=1.0,
                                             map_id=rec.map_id)
            except Exception as exc:  # job failure must not kill the worker
                with self._lock:
                    self.jobs[job_id].update(status="failed", error=str(exc))

    def _progress_cb(self, job_id, max_outer):
        def cb(outer_iter, _f):
            with self._lock:
                self.jobs[job_id]["progress"] = min(outer_iter / max_outer, 1.0)
        return cb

    def _run_discover(self, job_id, k, hyper):
        g = self.graph
        m, state = fit(g, k, hyper,
                       progress=self._progress_cb(job_id, hyper.max_outer))
        nm = build_map(m, g, c_mode=hyper.c_mode, c=hyper.c)
        return MapRecord(map_id=self._next_id("m"),
                         doc_bytes=canon_json_bytes(map_doc(nm)),
                         network_map=nm, params=m, hyperparams=hyper)

    def _run_zoom(self, job_id, parent_id, split_role, beta, n_subroles):
        with self._lock:
            parent = self.maps[parent_id]
        hyper = parent.hyperparams
        spec = ZoomSpec(parent_params=parent.params, split_role=split_role,
                        n_subroles=n_subroles, beta=beta)
        child, nm = zoom(self.graph, spec, hyper,
                         parent_landmark_ids=parent.network_map.landmark_ids,
                         progress=self._progress_cb(job_id, hyper.max_outer))
        return MapRecord(map_id=self._next_id("m"),
                         doc_bytes=canon_json_bytes(map_doc(nm)),
                         network_map=nm, params=child, hyperparams=hyper,
                         parent_id=parent_id, split_role=split_role)

    # -- queries --------------------------------------------------------------

    def job(self, job_id):
        with self._lock:
            job = self.jobs.get(job_id)
            return dict(job) if job else None

    def map_record(self, map_id):
        with self._lock:
            return self.maps.get(map_id)

    def lineage_tree(self):
        with self._lock:
            snapshot = {mid: (rec.parent_id, rec.split_role, rec.params.n_roles,
                              list(rec.children))
                        for mid, rec in self.maps.items()}

        def node(mid):
            parent_id, split_role, k, children = snapshot[mid]
            return {"id": mid, "k": k, "split_role": split_role,
                    "children": [node(c) for c in children]}

        roots = [mid for mid, rec in snapshot.items() if rec[0] is None]
        return {"roots": [node(mid) for mid in roots]}


class DiscoverRequest(BaseModel):
    k: int
    hyperparams: dict = {}


class ZoomRequest(BaseModel):
    split_role: int
    beta: float = 0.002
    n_subroles: int = 2


def _hyper_from_body(body):
    try:
        return Hyperparams(**body).validate()
    except (TypeError, ValueError) as exc:
        raise HTTPException(status_code=400, detail=f"bad hyperparams: {exc}")


def create_app(store, assets_dir=None):
    app = FastAPI(title="rolemap explorer service")

    @app.exception_handler(HTTPException)
    async def _http_error(request: Request, exc: HTTPException):
        return JSONResponse(status_code=exc.status_code,
                            content={"code": exc.status_code,
                                     "message": str(exc.detail)})

    @app.post("/api/discover", status_code=202)
    def discover(req: DiscoverRequest):
        hyper = _hyper_from_body(req.hyperparams)
        try:
            job_id = store.submit_discover(req.k, hyper)
        except LookupError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"job_id": job_id}

    @app.post("/api/maps/{map_id}/zoom", status_code=202)
    def zoom_map(map_id: str, req: ZoomRequest):
        try:
            job_id = store.submit_zoom(map_id, req.split_role, req.beta,
                                       req.n_subroles)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=str(exc.args[0]))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"job_id": job_id}

    @app.get("/api/maps/{map_id}")
    def get_map(map_id: str):
        rec = store.map_record(map_id)
        if rec is None:
            raise HTTPException(status_code=404, detail=f"unknown map {map_id!r}")
        return Response(content=rec.doc_bytes, media_type="application/json")

    @app.get("/api/maps/{map_id}/coords")
    def get_coords(map_id: str):
        rec = store.map_record(map_id)
        if rec is None:
            raise HTTPException(status_code=404, detail=f"unknown map {map_id!r}")
        return PlainTextResponse(coords_tsv(rec.network_map))

    @app.get("/api/jobs/{job_id}")
    def get_job(job_id: str):
        job = store.job(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job {job_id!r}")
        return job

    @app.get("/api/lineage")
    def get_lineage():
        return store.lineage_tree()

    @app.get("/api/session")
    def get_session():
        g = store.graph
        return {
            "graph_loaded": g is not None,
            "n_nodes": g.n_nodes if g else 0,
            "n_edges": g.n_edges if g else 0,
            "attr_names": g.attr_names if g else [],
            "directed": g.directed if g else False,
            "hyperparam_defaults": asdict(Hyperparams()),
        }

    if assets_dir:
        from fastapi.staticfiles import StaticFiles
        app.mount("/", StaticFiles(directory=assets_dir, html=True),
                  name="explorer")

    return app
