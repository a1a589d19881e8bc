from __future__ import annotations

import json
import math
from fractions import Fraction
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Mapping, Optional, Sequence

import numpy as np
import pandas as pd
from jinja2 import Environment, FileSystemLoader, select_autoescape

from .errors import InputError
from .linalg import GaussianRational

if TYPE_CHECKING:
    from .runner import ReportDocument


def _float_text(x: float) -> str:
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    text = f"{x:.15g}"
    return "0" if text == "-0" else text


def format_scalar(value: Any) -> Any:
    """Report form of one scalar: integers and booleans stay native, everything else becomes a string."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (GaussianRational, Fraction)):
        return str(value)
    if isinstance(value, (float, np.floating)):
        return _float_text(float(value))
    if isinstance(value, (complex, np.complexfloating)):
        z = complex(value)
        if z.imag == 0:
            return _float_text(z.real)
        im = _float_text(z.imag)
        if z.real == 0:
            return f"{im}*i"
        sign = "" if im.startswith("-") else "+"
        return f"{_float_text(z.real)}{sign}{im}*i"
    return value


def serialize(obj: Any) -> Any:
    if isinstance(obj, Mapping):
        return {str(k): serialize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [serialize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [serialize(v) for v in obj.tolist()]
    return format_scalar(obj)


def emit_report(doc: "ReportDocument", path: Optional[str] = None) -> str:
    s = json.dumps(doc.to_dict(), ensure_ascii=False, indent=2)
    if path is not None:
        try:
            Path(path).write_text(s + "\n", encoding="utf-8")
        except OSError as exc:
            raise InputError(f"Cannot write report to {path}: {exc}") from exc
    return s


def coverage_matrix(coverage: Mapping[str, Mapping[str, str]], identities: Sequence[str]) -> pd.DataFrame:
    """Identity IDs against models; rows no model touches are dropped."""
    df = pd.DataFrame(
        {label: [cells.get(ident, "-") for ident in identities] for label, cells in coverage.items()},
        index=list(identities),
    )
    if df.empty:
        return df
    return df.loc[(df != "-").any(axis=1)]


def _get_env() -> Environment:
    templates_dir = Path(__file__).parent / "templates"
    env = Environment(
        loader=FileSystemLoader(str(templates_dir)),
        autoescape=select_autoescape(["html", "xml", "j2"]),
        enable_async=False,
        trim_blocks=True,
        lstrip_blocks=True,
    )
    return env


def render_text(doc: "ReportDocument") -> str:
    return doc.to_text()


def render_html(doc: "ReportDocument", json_href: Optional[str] = None, path: Optional[str] = None) -> str:
    env = _get_env()
    tpl = env.get_template("report.html.j2")
    data: Dict[str, Any] = doc.to_dict()
    html = tpl.render(doc=data, ok=doc.ok, json_href=json_href)
    if path is not None:
        try:
            Path(path).write_text(html, encoding="utf-8")
        except OSError as exc:
            raise InputError(f"Cannot write report to {path}: {exc}") from exc
    return html
