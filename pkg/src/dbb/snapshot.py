"""Posterior snapshot persistence.

Versioned line-oriented text: a header line

    dbb-snapshot v1 lambda=<value>

followed by one tab-separated record per prompt: ``prompt_id alpha beta
visits``. Pseudo-counts are written with 17 significant digits so that
load(save(x)) reproduces every float bit-exactly.
"""
from __future__ import annotations

from pathlib import Path

from dbb.estimators import PosteriorState

FORMAT_NAME = "dbb-snapshot"
FORMAT_VERSION = "v1"


def save_snapshot(path: str | Path, lam: float, posteriors: dict[str, PosteriorState]) -> None:
    lines = [f"{FORMAT_NAME} {FORMAT_VERSION} lambda={lam!r}"]
    for prompt_id, state in posteriors.items():
        if "\t" in prompt_id or "\n" in prompt_id:
            raise ValueError("prompt ids must not contain tabs or newlines")
        lines.append(f"{prompt_id}\t{state.alpha:.16e}\t{state.beta:.16e}\t{state.visits}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="ascii")


def load_snapshot(path: str | Path) -> tuple[float, dict[str, PosteriorState]]:
    text = Path(path).read_text(encoding="ascii")
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty snapshot file")
    header = lines[0].split(" ")
    if len(header) != 3 or header[0] != FORMAT_NAME or not header[2].startswith("lambda="):
        raise ValueError("not a posterior snapshot")
    if header[1] != FORMAT_VERSION:
        raise ValueError("snapshot version mismatch")
    lam = float(header[2][len("lambda="):])

    posteriors: dict[str, PosteriorState] = {}
    for line in lines[1:]:
        fields = line.split("\t")
        if len(fields) != 4:
            raise ValueError(f"malformed snapshot record: {line!r}")
        prompt_id, alpha, beta, visits = fields
        posteriors[prompt_id] = PosteriorState(
            alpha=float(alpha), beta=float(beta), visits=int(visits)
        )
    return lam, posteriors
