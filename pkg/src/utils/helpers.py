"""
Helper utilities for the crash hotspot engine.
Provides seeded random substreams, parallel mapping, hashing and deterministic output writing.
"""

from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TypeVar
import hashlib
import json
import logging

import numpy as np
from joblib import Parallel, delayed

from .. import __version__
from ..config.constants import ErrorMessages, SuccessMessages
from .exceptions import OutputError

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


class ReproHelpers:
    """
    Helper class with reproducibility utilities.
    Provides static methods shared by every pipeline stage.
    """

    @staticmethod
    def substream(seed: int, stream: int, index: int) -> np.random.Generator:
        """
        Counter-based generator keyed by (seed, stream, index).

        The same key yields the same draws regardless of which worker
        evaluates it or in what order.

        Args:
            seed: Run seed
            stream: Stream identifier (see RandomStreams)
            index: Replicate, zone or event index within the stream

        Returns:
            Philox-backed numpy Generator
        """
        sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(index)))
        return np.random.Generator(np.random.Philox(sequence))

    @staticmethod
    def chunk_ranges(n: int, chunk_size: int) -> List[range]:
        """Split ``range(n)`` into fixed-size chunks independent of worker count."""
        chunk_size = max(1, int(chunk_size))
        return [range(start, min(start + chunk_size, n)) for start in range(0, n, chunk_size)]

    @staticmethod
    def parallel_map(func: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
        """
        Apply ``func`` to every item, preserving input order.

        Args:
            func: Pure function of one item
            items: Work items
            workers: Thread count; 1 runs inline

        Returns:
            Results in the order of ``items``
        """
        if workers <= 1 or len(items) <= 1:
            return [func(item) for item in items]
        return Parallel(n_jobs=workers, prefer="threads")(delayed(func)(item) for item in items)

    @staticmethod
    def sha256_file(path: Path) -> str:
        """Hex SHA-256 digest of a file."""
        digest = hashlib.sha256()
        with open(path, "rb") as handle:
            for block in iter(lambda: handle.read(1 << 20), b""):
                digest.update(block)
        return digest.hexdigest()

    @staticmethod
    def ensure_dir(path: Path) -> Path:
        """Create a directory (and parents), mapping failures to OutputError."""
        path = Path(path)
        try:
            path.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise OutputError(ErrorMessages.UNWRITABLE_OUTPUT.value.format(path=path, error=e)) from e
        return path

    @staticmethod
    def write_text(path: Path, text: str) -> Path:
        """Write UTF-8 text with ``\\n`` line endings."""
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with open(path, "w", encoding="utf-8", newline="\n") as handle:
                handle.write(text)
        except OSError as e:
            raise OutputError(ErrorMessages.UNWRITABLE_OUTPUT.value.format(path=path, error=e)) from e
        logger.info(SuccessMessages.OUTPUT_WRITTEN.value.format(path=path))
        return path

    @staticmethod
    def write_bytes(path: Path, data: bytes) -> Path:
        """Write binary output, mapping failures to OutputError."""
        path = Path(path)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(data)
        except OSError as e:
            raise OutputError(ErrorMessages.UNWRITABLE_OUTPUT.value.format(path=path, error=e)) from e
        logger.info(SuccessMessages.OUTPUT_WRITTEN.value.format(path=path))
        return path

    @staticmethod
    def to_json(payload: Any) -> str:
        """Stable JSON rendering: sorted keys, two-space indent, trailing newline."""
        return json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"

    @staticmethod
    def write_json(path: Path, payload: Any) -> Path:
        """Write a JSON document deterministically."""
        return ReproHelpers.write_text(path, ReproHelpers.to_json(payload))

    @staticmethod
    def write_metadata(
        output: Path,
        command: str,
        parameters: Dict[str, Any],
        inputs: Iterable[Optional[Path]] = (),
        extra: Optional[Dict[str, Any]] = None,
    ) -> Path:
        """
        Write the ``<output>.meta.json`` sidecar that makes an output reproducible.

        Args:
            output: Output file the sidecar describes
            command: Subcommand that produced it
            parameters: Analysis parameters in effect
            inputs: Input files to fingerprint
            extra: Additional stamped fields (formula variants, weights metadata)

        Returns:
            Path of the sidecar
        """
        record = {
            "tool": "crash-hotspots",
            "version": __version__,
            "command": command,
            "parameters": parameters,
            "inputs": {
                Path(path).name: ReproHelpers.sha256_file(Path(path)) for path in inputs if path is not None
            },
        }
        if extra:
            record.update(extra)
        output = Path(output)
        return ReproHelpers.write_json(output.with_name(output.name + ".meta.json"), record)

    @staticmethod
    def format_float(value: float, digits: int = 12) -> str:
        """Fixed-width general float format used in CSV outputs."""
        if value is None or (isinstance(value, float) and np.isnan(value)):
            return ""
        return f"{float(value):.{digits}g}"


def _json_default(value: Any) -> Any:
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (Path, set, frozenset)):
        return sorted(value) if not isinstance(value, Path) else str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
