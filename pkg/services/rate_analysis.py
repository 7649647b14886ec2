"""Closed-form PIR rates of CB-cPIR, XPIR and SimplePIR, and the tables and curves built from them."""

import logging
import math
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.presets import BUILTIN_PRESETS, TABLE_PRESETS
from config.settings import settings
from models.errors import InvalidParametersError
from models.schemas import Preset, RateConfig, SchemeParams
from utils.file_utils import FileUtils
from .cryptanalysis import attack_cost

logger = logging.getLogger(__name__)

CURVE_HEADER = ("file_size_bits", "scheme", "variant", "rate")
AMORTIZATIONS = (1.0, 100.0, math.inf)


def _check_file_size(F: float) -> None:
    if not F > 0:
        raise InvalidParametersError(f"file size must be positive, got {F}")


def rate_cbcpir_asymptotic(params: SchemeParams) -> Fraction:
    """delta / (2 n s): the rate for L >> m delta and f = 1."""
    return Fraction(params.delta, 2 * params.n * params.s)


def rate_cbcpir_exact(params: SchemeParams) -> Fraction:
    """f L delta log2(q) / ((f + 1)(m delta n + L n) log2(q^s)); log2(q) cancels."""
    f, L, delta, n = params.f, params.L, params.delta, params.n
    return Fraction(f * L * delta, (f + 1) * (params.m * delta * n + L * n) * params.s)


def rate_cbcpir_filesize(F: float, m: int, params: SchemeParams, squared: bool = False) -> float:
    """Rate for a file of F bits; the squared variant arranges the database as a sqrt(m) x sqrt(m) grid."""
    _check_file_size(F)
    delta, width = params.delta, params.fq_width
    if squared:
        return F / (2 * width * math.sqrt(m) * (delta * params.log2_q + F / delta))
    return F / (2 * width * (m * delta * params.log2_q + F / delta))


def rate_xpir(F: float, m: int, s_c: float = 128_000, s_p: float = 20_000) -> float:
    """F / (m s_c + F s_c / s_p)."""
    _check_file_size(F)
    return F / (m * s_c + F * s_c / s_p)


def rate_simplepir(F: float, m: int, q_lwe: int = 2**32, p_lwe: int = 495, n_lwe: int = 1024,
                   t: float = 1.0) -> float:
    """F log2 p / ((n F / t sqrt(m) + (F + log2 p) sqrt(m)) log2 q); t = inf drops the hint."""
    _check_file_size(F)
    if not t >= 1:
        raise InvalidParametersError(f"amortization t must be >= 1 or inf, got {t}")
    log2_p = math.log2(p_lwe)
    root = math.sqrt(m)
    hint = 0.0 if math.isinf(t) else n_lwe * F / t * root
    return F * log2_p / ((hint + (F + log2_p) * root) * math.log2(q_lwe))


def file_size_grid(points: Optional[int] = None, low: Optional[float] = None,
                   high: Optional[float] = None) -> np.ndarray:
    """Log-spaced file sizes in bits."""
    return np.geomspace(low or settings.curve_min_bits, high or settings.curve_max_bits,
                        points or settings.curve_points)


def _t_label(t: float) -> str:
    return "inf" if math.isinf(t) else str(int(t))


def _q_label(params: SchemeParams) -> str:
    if params.q_exp == 1:
        return str(params.q_base)
    return f"{params.q_base}^{params.q_exp}"


class TableEmitter:
    """Builds the rate and attack-cost tables and the comparison curves, and writes them as CSV."""

    TABLE1_HEADER = ("preset", "q", "s", "v", "n", "k", "delta", "rate", "rate_float")
    TABLE2_HEADER = ("preset", "q", "s", "v", "n", "k", "delta", "security_bits",
                     "reported_attack_exponent", "batches", "log2_batches", "log2_fq_ops")

    def __init__(self, presets: Optional[Sequence[Preset]] = None):
        self.presets = list(presets) if presets is not None else [BUILTIN_PRESETS[name] for name in TABLE_PRESETS]

    def table1_rows(self) -> List[Tuple]:
        rows = []
        for preset in self.presets:
            p = preset.params
            rate = rate_cbcpir_asymptotic(p)
            rows.append((preset.name, _q_label(p), p.s, p.v, p.n, p.k, p.delta, str(rate), f"{float(rate):.12g}"))
        return rows

    def table2_rows(self) -> List[Tuple]:
        rows = []
        for preset in self.presets:
            p = preset.params
            cost = attack_cost(p)
            rows.append((preset.name, _q_label(p), p.s, p.v, p.n, p.k, p.delta,
                         "" if preset.security_bits is None else preset.security_bits,
                         "" if preset.reported_attack_exponent is None else preset.reported_attack_exponent,
                         cost.batches, f"{cost.log2_batches:.6f}", f"{cost.log2_fq_ops:.6f}"))
        return rows

    def curve_rows(self, figure: int, config: RateConfig, grid: Iterable[float],
                   amortizations: Sequence[float] = AMORTIZATIONS) -> List[Tuple]:
        """Rows (F, scheme, variant, rate): CB-cPIR plain and squared against XPIR (figure 4) or SimplePIR (5)."""
        if figure not in (4, 5):
            raise InvalidParametersError(f"figure must be 4 or 5, got {figure}")
        params = config.params
        rows = []
        for F in grid:
            F = float(F)
            rows.append((F, "cbcpir", "plain", rate_cbcpir_filesize(F, params.m, params)))
            rows.append((F, "cbcpir", "squared", rate_cbcpir_filesize(F, params.m, params, squared=True)))
            if figure == 4:
                rows.append((F, "xpir", "default",
                             rate_xpir(F, params.m, config.xpir_ciphertext_bits, config.xpir_plaintext_bits)))
            else:
                for t in amortizations:
                    rows.append((F, "simplepir", f"t={_t_label(t)}",
                                 rate_simplepir(F, params.m, config.simplepir_q, config.simplepir_p,
                                                config.simplepir_n, t)))
        return rows

    def point_rows(self, figure: int, config: RateConfig) -> List[Tuple]:
        """Curve rows at the single file size and amortization held by ``config``."""
        if config.file_size_bits is None:
            raise InvalidParametersError("a point evaluation needs file_size_bits")
        return self.curve_rows(figure, config, [config.file_size_bits], (config.amortization,))

    @staticmethod
    def format_curve_rows(rows: Iterable[Tuple]) -> List[Tuple[str, str, str, str]]:
        return [(f"{F:.12g}", scheme, variant, f"{rate:.12g}") for F, scheme, variant, rate in rows]

    def write_table(self, table: int, out_dir: Union[str, Path, None] = None) -> Path:
        directory = FileUtils.ensure_output_dir(out_dir)
        if table == 1:
            return FileUtils.write_csv(directory / "table1_rates.csv", self.TABLE1_HEADER, self.table1_rows())
        if table == 2:
            return FileUtils.write_csv(directory / "table2_attack_cost.csv", self.TABLE2_HEADER, self.table2_rows())
        raise InvalidParametersError(f"table must be 1 or 2, got {table}")

    def write_curves(self, figure: int, config: RateConfig, out_dir: Union[str, Path, None] = None,
                     preset_name: str = "", amortizations: Sequence[float] = AMORTIZATIONS) -> Path:
        """Curve CSV plus a JSON sidecar recording the constants and interpretation choices."""
        directory = FileUtils.ensure_output_dir(out_dir)
        grid = file_size_grid()
        rows = self.format_curve_rows(self.curve_rows(figure, config, grid, amortizations))
        path = FileUtils.write_csv(directory / f"figure{figure}_curves.csv", CURVE_HEADER, rows)
        FileUtils.write_json(directory / f"figure{figure}_curves.json", self.curve_metadata(
            figure, config, preset_name, amortizations))
        return path

    @staticmethod
    def curve_metadata(figure: int, config: RateConfig, preset_name: str,
                       amortizations: Sequence[float]) -> Dict[str, object]:
        params = config.params
        metadata: Dict[str, object] = {
            "figure": figure,
            "preset": preset_name,
            "params": params.model_dump(),
            "delta": params.delta,
            "grid": {"points": settings.curve_points, "min_bits": settings.curve_min_bits,
                     "max_bits": settings.curve_max_bits, "spacing": "geometric"},
        }
        if figure == 4:
            logger.warning("XPIR rate reads the plaintext-size symbol c_p as s_p")
            metadata["xpir"] = {"ciphertext_bits": config.xpir_ciphertext_bits,
                                "plaintext_bits": config.xpir_plaintext_bits,
                                "c_p_read_as": "s_p"}
        else:
            metadata["simplepir"] = {"q": config.simplepir_q, "p": config.simplepir_p, "n": config.simplepir_n,
                                     "log2_p": math.log2(config.simplepir_p),
                                     "amortizations": [_t_label(t) for t in amortizations]}
            metadata["field_choice"] = ("running text (q = 2^135)" if preset_name == "fig5-simplepir"
                                        else "figure caption (q = 2^104)" if preset_name == "fig5-caption"
                                        else "custom")
        return metadata


def emit_tables_and_curves(out_dir: Union[str, Path, None] = None,
                           presets: Optional[Sequence[Preset]] = None) -> List[Path]:
    """Write both tables and both figures' curves with the default comparison presets."""
    emitter = TableEmitter(presets)
    paths = [emitter.write_table(1, out_dir), emitter.write_table(2, out_dir)]
    for figure, name in ((4, "fig4-xpir"), (5, "fig5-simplepir")):
        config = RateConfig(params=BUILTIN_PRESETS[name].params)
        paths.append(emitter.write_curves(figure, config, out_dir, preset_name=name))
    return paths
