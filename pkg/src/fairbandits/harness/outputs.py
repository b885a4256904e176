"""CSV/JSON serialisation of a :class:`ResultBundle`."""

from __future__ import annotations

import json
import math
import os
import shutil
import tempfile
from pathlib import Path

from fairbandits.errors import ConfigError

CURVE_HEADER = "round,fair_regret_mean,fair_regret_std,std_regret_mean,std_regret_std"
SELECTION_HEADER = "group,selected_fraction_mean,selected_fraction_std"


def fmt(x) -> str:
    """Shortest round-trippable decimal; undefined values become an empty cell."""
    x = float(x)
    if math.isnan(x):
        return ""
    if x == 0.0:
        return "0.0"
    return repr(x)


def _csv_cell(text: str) -> str:
    if any(c in text for c in ',"\n\r'):
        return '"' + text.replace('"', '""') + '"'
    return text


def render_files(bundle) -> dict[str, str]:
    stride = bundle.config.record_stride
    files = {}
    for name, curves in bundle.curves.items():
        lines = [CURVE_HEADER]
        for i in range(0, len(curves.rounds), stride):
            lines.append(",".join([
                str(int(curves.rounds[i])),
                fmt(curves.fair_mean[i]),
                fmt(curves.fair_std[i]),
                fmt(curves.std_mean[i]),
                fmt(curves.std_std[i]),
            ]))
        files[f"curves_{name}.csv"] = "\n".join(lines) + "\n"
        lines = [SELECTION_HEADER]
        for g, label in enumerate(bundle.group_names):
            lines.append(",".join([_csv_cell(label), fmt(curves.selection_mean[g]), fmt(curves.selection_std[g])]))
        files[f"selection_{name}.csv"] = "\n".join(lines) + "\n"
    files["manifest.json"] = json.dumps(bundle.manifest, indent=2, sort_keys=True) + "\n"
    return files


def emit_outputs(bundle, out_dir, overwrite: bool = False) -> list[Path]:
    """Write all files into ``out_dir`` atomically-ish.

    Files are first written to a scratch directory next to ``out_dir`` and only
    moved into place once all of them were written; on failure nothing partial
    is left behind.  Existing files are replaced only with ``overwrite=True``.
    """
    out_dir = Path(out_dir)
    files = render_files(bundle)
    targets = [out_dir / name for name in files]
    clash = [p.name for p in targets if p.exists()]
    if clash and not overwrite:
        raise ConfigError(f"{out_dir}: refusing to overwrite {sorted(clash)} (pass --overwrite)")
    out_dir.mkdir(parents=True, exist_ok=True)
    scratch = Path(tempfile.mkdtemp(prefix=".partial-", dir=out_dir))
    try:
        for name, text in files.items():
            with open(scratch / name, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        for name in files:
            os.replace(scratch / name, out_dir / name)
    finally:
        shutil.rmtree(scratch, ignore_errors=True)
    return targets
