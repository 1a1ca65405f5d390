"""Chair-mounted urban sensing: frame codec, radio and energy models, network server and simulation."""

import json as _json

from . import _core
from ._core import UrbanSenseError, lifetime_days, point_in_square, rain_flag

__all__ = [
    "UrbanSenseError",
    "Server",
    "daily_energy",
    "decode_frame",
    "default_scenario",
    "encode_frame",
    "lifetime_days",
    "point_in_square",
    "rain_flag",
    "time_on_air",
]


def encode_frame(frame: dict) -> str:
    """Packs a frame dict into 58 lowercase hex characters."""
    return _core.encode_frame_hex(_json.dumps(frame))


def decode_frame(payload_hex: str) -> dict:
    return _json.loads(_core.decode_frame_hex(payload_hex))


def time_on_air(sf: int, payload_len: int, **radio) -> dict:
    """Preamble, payload and total airtime in seconds, plus the payload symbol count."""
    preamble, payload, total, symbols = _core.time_on_air(sf, payload_len, **radio)
    return {"preamble_s": preamble, "payload_s": payload, "total_s": total, "payload_symbols": symbols}


def daily_energy(gnss_enabled: bool = True, **profile) -> dict:
    return _core.daily_energy(gnss_enabled, **profile)


def default_scenario() -> dict:
    return _json.loads(_core.default_scenario_json())


class Server:
    """Network server over a SQLite store (in memory unless a path is given)."""

    def __init__(self, path: str = ":memory:"):
        self._impl = _core.Server(path)

    def ingest(self, envelope: dict) -> str:
        return self._impl.ingest(_json.dumps(envelope))

    def record_count(self) -> int:
        return self._impl.record_count()

    def export_csv(self) -> str:
        return self._impl.export_csv()

    def devices(self) -> list:
        return _json.loads(self._impl.devices())

    def records(self) -> list:
        return _json.loads(self._impl.records())

    def simulate(self, scenario: dict, threads: int = 0) -> dict:
        return _json.loads(self._impl.simulate(_json.dumps(scenario), threads))
