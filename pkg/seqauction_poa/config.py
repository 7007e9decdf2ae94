import os
import json
from typing import Any

# Default directory for files written by `fuzz` and `poa-table --output`.
OUTPUT_DIR = os.getenv("SEQAUCTION_OUTPUT_DIR", "seqauction_output")
QUARANTINE_DIR = os.path.join(OUTPUT_DIR, "quarantine")

# Random instances draw incremental values from the grid {0, 1/D, ..., N/D}.
# A small denominator keeps rational bit-growth bounded and makes exact ties likely.
GRID_DENOMINATOR = int(os.getenv("SEQAUCTION_GRID_DENOMINATOR", "8"))
GRID_NUMERATOR_MAX = int(os.getenv("SEQAUCTION_GRID_MAX", "16"))

DECIMAL_PLACES = 12

DEFAULT_FUZZ_COUNT = 1000
DEFAULT_MAX_ITEMS = 12
DEFAULT_SEED = 0


def load_json(path: str) -> Any:
    """
    Reads a JSON document from disk.

    Args:
        path (str): Path to the JSON file.

    Returns:
        Any: The decoded document.

    Raises:
        FileNotFoundError: If the file does not exist.
        ValueError: If the file is not valid JSON.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"Input file '{path}' not found.")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f"Error reading {path}: {e}")


def save_json(path: str, data: Any) -> None:
    """
    Writes a JSON document, creating parent directories as needed.

    Args:
        path (str): Destination path.
        data (Any): JSON-serializable document.
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
