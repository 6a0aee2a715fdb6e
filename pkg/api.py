import json
import os
import sys
from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel
from typing import Optional

# Ensure src/ is importable
sys.path.insert(0, os.path.join(os.path.dirname(__file__), 'src'))
from angle_codec import decode_angle
from backbone_geometry import chains_to_frame, compute_torsions
from pdb_parser import parse_pdb
from residue_encoder import encode_sequence, get_scheme, list_schemes
from result_tables import RankMetric, report_from_journal, rows_to_frame
from window_dataset import TargetMode

app = FastAPI(title="Torsion Prediction API", version="1.0.0")

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)

JOURNAL_DIR = os.environ.get('TORSION_JOURNAL_DIR', 'runs')


# --- Data Models ---
class EncodeRequest(BaseModel):
    scheme: str = "one-hot"
    sequence: str
    normalize: bool = False

class DihedralRequest(BaseModel):
    pdb_text: str
    pdb_id: Optional[str] = "XXXX"

class DecodeRequest(BaseModel):
    sin: float
    cos: float

# --- Endpoints ---

@app.get("/")
def root():
    return {"message": "Torsion Prediction API is running. Visit /docs for documentation."}

@app.get("/health")
def health_check():
    return {"status": "ok"}

@app.get("/api/schemes")
def get_schemes():
    return {"schemes": list_schemes()}

@app.post("/api/encode")
def encode(req: EncodeRequest):
    try:
        scheme = get_scheme(req.scheme, normalize=req.normalize)
        matrix = encode_sequence(scheme, req.sequence)
        return {"scheme": scheme.name, "rows": matrix.tolist()}
    except (KeyError, ValueError) as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))

@app.post("/api/dihedrals")
def dihedrals(req: DihedralRequest):
    try:
        chains = compute_torsions(parse_pdb(req.pdb_text), pdb_id=req.pdb_id or "XXXX")
        # undefined angles (NaN) become null
        return json.loads(chains_to_frame(chains).to_json(orient="records"))
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))

@app.post("/api/decode")
def decode(req: DecodeRequest):
    try:
        return {"degrees": decode_angle(req.sin, req.cos)}
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))

@app.get("/api/report")
def report(journal: str, metric: str = "mae", target: str = "all", top: int = 20):
    path = os.path.join(JOURNAL_DIR, os.path.basename(journal))
    if not os.path.exists(path):
        raise HTTPException(status_code=404, detail=f"Journal {journal} not found")
    try:
        mode = None if target == "all" else TargetMode(target)
        rows = report_from_journal(path, RankMetric(metric), mode, top)
        return rows_to_frame(rows).to_dict(orient='records')
    except ValueError as e:
        raise HTTPException(status_code=400, detail=str(e))
    except Exception as e:
        raise HTTPException(status_code=500, detail=str(e))
