"""
Helper utilities for asyndgan-desk
Common functions and utilities
"""

import asyncio
import hashlib
import json
import logging

import numpy as np

logger = logging.getLogger(__name__)

def format_bytes(amount, decimals=2):
    """Format a byte count for display (decimal units, 1 MB = 10^6 bytes)"""
    value = float(amount)
    for unit in ("B", "kB", "MB", "GB"):
        if abs(value) < 1000 or unit == "GB":
            return f"{value:,.0f} {unit}" if unit == "B" else f"{value:,.{decimals}f} {unit}"
        value /= 1000.0

def format_percentage(value, decimals=2):
    """Format a fraction in [0, 1] as a percentage"""
    return f"{value * 100:.{decimals}f}%"

def derive_seed(master_seed, *path):
    """Deterministic 63-bit seed for a (round, node, phase, step, ...) path under the master seed"""
    seq = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, *(int(p) for p in path)])
    return int(seq.generate_state(2, dtype=np.uint64)[0] >> np.uint64(1))

def canonical_json(data):
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=str)

def config_hash(data):
    """SHA-256 over canonical JSON"""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()

async def async_retry_with_backoff(coro_factory, max_retries=5, delay=0.05, retry_on=(OSError,)):
    """Await coro_factory() with exponential backoff on the listed exceptions"""
    for attempt in range(max_retries):
        try:
            return await coro_factory()
        except retry_on as e:
            if attempt == max_retries - 1:
                raise e

            wait_time = delay * (2 ** attempt)
            logger.warning(f"Attempt {attempt + 1} failed: {e}. Retrying in {wait_time:.2f}s...")
            await asyncio.sleep(wait_time)


def create_summary_table(data, headers):
    """Create ASCII table for terminal display"""
    if not data or not headers:
        return "No data to display"

    # Calculate column widths
    col_widths = {}
    for header in headers:
        col_widths[header] = len(header)

    for row in data:
        for header in headers:
            value = str(row.get(header, ''))
            col_widths[header] = max(col_widths[header], len(value))

    # Create table
    separator = "+" + "+".join("-" * (col_widths[h] + 2) for h in headers) + "+"
    header_row = "|" + "|".join(f" {h:<{col_widths[h]}} " for h in headers) + "|"

    result = [separator, header_row, separator]

    for row in data:
        row_str = "|"
        for header in headers:
            value = str(row.get(header, ''))
            row_str += f" {value:<{col_widths[header]}} |"
        result.append(row_str)

    result.append(separator)
    return "\n".join(result)
