"""
Interfaccia a riga di comando: analisi dei sistemi, verdetti sulle condizioni
al bordo, soluzione di istanze, sonde di instabilità e dimostrazione di Kramers.

Codici di uscita: 0 successo, 1 errore d'uso/IO/validazione, 2 problema mal posto.

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

import argparse
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .cache_manager import fingerprint, get_cache_manager
from .config import DEFAULT_CONFIG, NumericsConfig
from .error_handler import (
    EXIT_ILL_POSED, EXIT_OK, GradHalfspaceError, InputFileError, UnstableBoundaryError,
    UsageError, ValidationError, get_error_handler,
)
from .exp_poly import ExpPolyVec, SampledVec, VectorFunction
from .halfspace_solver import instability_witness, solve
from .logger import logger
from .maxwell_bc import (
    H_OPTIONS, MaxwellBC, assemble_grad_bc, assemble_modified_bc, check_maxwell_bc,
    solve_layer_with_maxwell,
)
from .moment_system_builder import MomentSystem, build_full3d, build_kramers3, build_reduced_couette
from .subspace_transform import (
    SpectralFactorization, SubspaceDecomposition, build_decomposition, decomposition_report,
    spectral_factorization,
)
from .validation_mixin import ValidationMixin
from .wellposedness_checker import BoundaryOperator, check_general_bc, predicted_counts

COMMANDS = ("analyze", "check-bc", "solve", "probe", "demo")
SYSTEM_BUILDERS = {
    "full3d": lambda p: build_full3d(int(p.get("M", 5)), float(p.get("nu", 1.0))),
    "kramers3": lambda p: build_kramers3(float(p.get("nu", 1.0))),
    "reduced1d": lambda p: build_reduced_couette(int(p.get("M", 5)), float(p.get("nu", 1.0))),
}
DEFAULT_TARGET = 1e3


@dataclass
class RunConfig(ValidationMixin):
    """Parametri di un'esecuzione della CLI"""
    command: str
    system: Optional[str] = None
    bc: Optional[str] = None
    source: Optional[str] = None
    weight: Optional[float] = None
    out: Optional[str] = None
    fmt: str = "json"
    target: float = DEFAULT_TARGET
    demo: str = "kramers3"
    csv_points: int = 200
    numerics: NumericsConfig = field(default_factory=lambda: DEFAULT_CONFIG)

    def validate(self):
        errors: List[str] = []
        if self.command not in COMMANDS:
            errors.append(f"comando sconosciuto: {self.command}")
        if self.weight is not None:
            errors.extend(self.validate_range("weight", self.weight, 0.0, math.inf, open_low=True)[1])
        if self.fmt not in ("json", "csv"):
            errors.append(f"formato non supportato: {self.fmt}")
        if self.command in ("analyze", "check-bc", "solve", "probe") and not self.system:
            errors.append(f"{self.command} richiede --system")
        if self.command in ("check-bc", "probe") and not self.bc:
            errors.append(f"{self.command} richiede --bc")
        if self.command == "demo" and self.demo != "kramers3":
            errors.append(f"demo sconosciuta: {self.demo}")
        if errors:
            raise UsageError("; ".join(errors))


class _ArgumentParser(argparse.ArgumentParser):
    """argparse con errori d'uso mappati sul codice 1 invece di 2"""

    def error(self, message):
        raise UsageError(message, prog=self.prog)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="grad-halfspace",
                             description="Strati limite in semispazio per sistemi di momenti di Grad")
    parser.add_argument("--log-dir", default=None, help="Directory dei file di log")
    parser.add_argument("--verbose", action="store_true", help="Log INFO su console")
    sub = parser.add_subparsers(dest="command", parser_class=_ArgumentParser)

    def common(p, bc: bool = False, source: bool = False):
        p.add_argument("--system", help="full3d:M=5,nu=1 | kramers3:nu=1 | reduced1d:M=5 | file JSON")
        if bc:
            p.add_argument("--bc", help="grad:chi=1 | modified:chi=1,H=identity,c=1 | file JSON")
        if source:
            p.add_argument("--source", help="Sorgente h: JSON esponenziale-polinomio o CSV su griglia")
        p.add_argument("--weight", type=float, default=None, help="Peso a (predefinito: automatico)")
        p.add_argument("--out", default=None, help="File di uscita (predefinito: stdout)")
        p.add_argument("--tol-eig", type=float, default=None, help="Soglia relativa autovalori nulli")
        p.add_argument("--grid-points", type=int, default=None, help="Punti della griglia del residuo")
        p.add_argument("--format", dest="fmt", choices=("json", "csv"), default="json")

    common(sub.add_parser("analyze", help="Decomposizione e fattorizzazione spettrale"))
    common(sub.add_parser("check-bc", help="Verdetto di buona posizione"), bc=True)
    solve_p = sub.add_parser("solve", help="Soluzione in forma chiusa")
    common(solve_p, bc=True, source=True)
    solve_p.add_argument("--csv-points", type=int, default=200)
    probe_p = sub.add_parser("probe", help="Testimone di instabilità")
    common(probe_p, bc=True)
    probe_p.add_argument("--target", type=float, default=DEFAULT_TARGET)
    demo_p = sub.add_parser("demo", help="Dimostrazioni")
    demo_p.add_argument("name", nargs="?", default="kramers3")
    demo_p.add_argument("--out", default=None)
    demo_p.add_argument("--format", dest="fmt", choices=("json",), default="json")
    return parser


def parse_args(argv: Optional[Sequence[str]] = None) -> RunConfig:
    """
    Converte gli argomenti in RunConfig validata

    Raises:
        UsageError: argomenti mancanti o non validi
        ValidationError: tolleranze fuori intervallo
    """
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise UsageError("comando mancante: " + " | ".join(COMMANDS))
    level = 20 if args.verbose else DEFAULT_CONFIG.log_level
    numerics = DEFAULT_CONFIG.with_overrides(
        tol_eig=getattr(args, "tol_eig", None),
        grid_points=getattr(args, "grid_points", None),
        log_dir=args.log_dir,
        log_level=level,
    )
    config = RunConfig(
        command=args.command, system=getattr(args, "system", None), bc=getattr(args, "bc", None),
        source=getattr(args, "source", None), weight=getattr(args, "weight", None),
        out=args.out, fmt=args.fmt, target=getattr(args, "target", DEFAULT_TARGET),
        demo=getattr(args, "name", "kramers3"), csv_points=getattr(args, "csv_points", 200),
        numerics=numerics,
    )
    config.validate()
    return config


# ===== INGRESSI =====

def _parse_params(text: str) -> Dict[str, str]:
    params = {}
    for item in filter(None, (part.strip() for part in text.split(","))):
        if "=" not in item:
            raise UsageError(f"parametro senza valore: '{item}'")
        key, value = item.split("=", 1)
        params[key.strip()] = value.strip()
    return params


def _read_json(path: Union[str, Path]) -> Dict[str, Any]:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise InputFileError(f"impossibile leggere {path}: {e}", path=str(path)) from e
    except json.JSONDecodeError as e:
        raise InputFileError(f"JSON non valido in {path}: {e}", path=str(path)) from e


def _looks_like_file(text: str) -> bool:
    return text.lower().endswith(".json") or Path(text).is_file()


def parse_system(text: str) -> MomentSystem:
    """Sistema da 'nome:parametri' o da file JSON"""
    if _looks_like_file(text):
        return MomentSystem.from_dict(_read_json(text))
    name, _, rest = text.partition(":")
    if name not in SYSTEM_BUILDERS:
        raise UsageError(f"sistema sconosciuto: {name}", available=sorted(SYSTEM_BUILDERS))
    try:
        return SYSTEM_BUILDERS[name](_parse_params(rest))
    except ValueError as e:
        raise UsageError(f"parametri di sistema non validi: {e}") from e


def _bc_from_dict(doc: Dict[str, Any], system: MomentSystem,
                  numerics: NumericsConfig) -> Union[MaxwellBC, BoundaryOperator]:
    kind = doc.get("kind")
    try:
        if kind == "matrix":
            B3 = np.asarray(doc["B3"], dtype=float)
            g = np.asarray(doc.get("g", np.zeros(B3.shape[0])), dtype=float)
            return BoundaryOperator(B3, g, doc.get("description", "matrix"))
        chi = float(doc.get("chi", 1.0))
        if kind == "grad":
            bc = assemble_grad_bc(system, chi, numerics)
        elif kind == "modified":
            H = doc.get("H", "flux")
            if not isinstance(H, str):
                H = np.asarray(H, dtype=float)
            bc = assemble_modified_bc(system, H, chi, float(doc.get("c", 1.0)), numerics)
        else:
            raise UsageError(f"tipo di condizione sconosciuto: {kind}")
    except (KeyError, TypeError, ValueError) as e:
        raise ValidationError(f"descrizione della condizione non valida: {e}") from e
    return bc.with_data(doc.get("g1"), doc.get("g2"))


def parse_bc(text: str, system: MomentSystem,
             numerics: NumericsConfig = DEFAULT_CONFIG) -> Union[MaxwellBC, BoundaryOperator]:
    """Condizione da 'grad:chi=1', 'modified:chi=1,H=identity,c=1' o file JSON"""
    if _looks_like_file(text):
        return _bc_from_dict(_read_json(text), system, numerics)
    kind, _, rest = text.partition(":")
    params: Dict[str, Any] = _parse_params(rest)
    if "H" in params and params["H"] not in H_OPTIONS:
        raise UsageError(f"H deve essere uno tra {H_OPTIONS} (o una matrice in un file JSON)")
    return _bc_from_dict({"kind": kind, **params}, system, numerics)


def load_source(text: Optional[str], dim: int) -> VectorFunction:
    """Sorgente da JSON esponenziale-polinomio o CSV; assente = h nulla"""
    if text is None:
        return ExpPolyVec.zeros(dim)
    if text.lower().endswith(".csv"):
        h = SampledVec.from_csv(text)
    else:
        h = ExpPolyVec.from_dict(_read_json(text))
    if h.dim != dim:
        raise ValidationError(f"la sorgente ha dimensione {h.dim}, attesa {dim}")
    return h


# ===== PIPELINE =====

def analyze_system(system: MomentSystem,
                   numerics: NumericsConfig = DEFAULT_CONFIG) -> Tuple[SubspaceDecomposition, SpectralFactorization]:
    """Decomposizione e fattorizzazione con cache per impronta di (A, Q, tolleranze)"""
    key = fingerprint(system.A, system.Q, extra=sorted(numerics.as_dict().items()))

    def factory():
        system.validate(numerics)
        dec = build_decomposition(system, numerics)
        return dec, spectral_factorization(dec, config=numerics)

    return get_cache_manager().get_or_set(key, factory)


def default_weight(spec: SpectralFactorization, h: Optional[VectorFunction] = None) -> float:
    """a = 0.9 min(1/lambda_max, tasso minimo di h); 1 se entrambi illimitati"""
    bound = min(spec.weight_bound, h.min_rate() if h is not None else math.inf)
    return 0.9 * bound if math.isfinite(bound) else 1.0


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def render_json(report: Dict[str, Any]) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True)


def write_output(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text + ("" if text.endswith("\n") else "\n"))
        return
    Path(out).write_text(text, encoding="utf-8")
    logger.info(f"report scritto in {out}", "CLI")


# ===== COMANDI =====

def _system_header(system: MomentSystem) -> Dict[str, Any]:
    return {"variant": system.variant, "order": system.order, "nu": system.nu, "N": system.N,
            "m": system.m, "n": system.n, "variables": system.variable_labels()}


def cmd_analyze(config: RunConfig) -> Tuple[int, Dict[str, Any]]:
    system = parse_system(config.system)
    dec, spec = analyze_system(system, config.numerics)
    report = {"system": _system_header(system), **decomposition_report(dec, spec)}
    if system.has_parity and dec.parity is not None:
        report["parity_counts"] = predicted_counts(system, dec, spec)
    return EXIT_OK, report


def _verdict_for(bc, system, dec, spec, numerics) -> Dict[str, Any]:
    if isinstance(bc, MaxwellBC):
        return {k: (v.to_dict() if hasattr(v, "to_dict") else v)
                for k, v in check_maxwell_bc(system, bc, dec, spec, numerics).items()}
    return {"verdict": check_general_bc(bc, spec, numerics).to_dict()}


def cmd_check_bc(config: RunConfig) -> Tuple[int, Dict[str, Any]]:
    system = parse_system(config.system)
    dec, spec = analyze_system(system, config.numerics)
    bc = parse_bc(config.bc, system, config.numerics)
    report = {"system": _system_header(system), **_verdict_for(bc, system, dec, spec, config.numerics)}
    status = EXIT_OK if report["verdict"]["well_posed"] else EXIT_ILL_POSED
    return status, report


def cmd_solve(config: RunConfig) -> Tuple[int, Dict[str, Any]]:
    system = parse_system(config.system)
    dec, spec = analyze_system(system, config.numerics)
    h = load_source(config.source, system.N)
    a = config.weight if config.weight is not None else default_weight(spec, h)
    bc = parse_bc(config.bc, system, config.numerics) if config.bc else None
    labels = system.variable_labels()
    report: Dict[str, Any] = {"system": _system_header(system)}

    if isinstance(bc, MaxwellBC) and bc.kind == "modified":
        g1 = bc.g1 if bc.g1 is not None else np.zeros(system.n)
        g2 = bc.g2 if bc.g2 is not None else np.zeros(system.m)
        layer = solve_layer_with_maxwell(system, dec, spec, bc, g1, g2, h, a, config.numerics)
        solution = layer.solution
        report.update(layer.to_dict(labels))
    else:
        if bc is None:
            if spec.n_plus:
                raise UsageError(f"n+ = {spec.n_plus}: serve --bc")
            square = BoundaryOperator(np.zeros((0, spec.dim)), np.zeros(0), "none")
        else:
            operator = bc.boundary_operator(dec) if isinstance(bc, MaxwellBC) else bc
            verdict = check_general_bc(operator, spec, config.numerics)
            report["verdict"] = verdict.to_dict()
            if not verdict.well_posed:
                raise UnstableBoundaryError(f"condizione {operator.description} non ben posta",
                                            solvable=verdict.solvable, stable=verdict.stable)
            C = verdict.certificate_C
            square = BoundaryOperator(C.T @ operator.B3, C.T @ operator.g, operator.description)
        solution = solve(system, dec, spec, square, h, a, config.numerics)
        report["solution"] = solution.to_dict(labels)

    if config.fmt == "csv":
        return EXIT_OK, {"_csv": solution.sample_frame(config.csv_points, labels=labels)}
    return EXIT_OK, report


def cmd_probe(config: RunConfig) -> Tuple[int, Dict[str, Any]]:
    system = parse_system(config.system)
    dec, spec = analyze_system(system, config.numerics)
    bc = parse_bc(config.bc, system, config.numerics)
    operator = bc.boundary_operator(dec) if isinstance(bc, MaxwellBC) else bc
    a = config.weight if config.weight is not None else default_weight(spec)
    witness = instability_witness(system, dec, spec, operator, a, config.target, config.numerics)
    report = {
        "system": _system_header(system),
        "weight": a,
        "verdict": check_general_bc(operator, spec, config.numerics).to_dict(),
        "witness": None if witness is None else witness.to_dict(),
    }
    return EXIT_OK, report


def kramers_demo(numerics: NumericsConfig = DEFAULT_CONFIG, nu: float = 1.0,
                 sigma_bar: float = 1.0, chi: float = 1.0, c: float = 1.0) -> Dict[str, Any]:
    """
    Sistema di Kramers con h = (0, e^{-y}, 0): u1 = -sqrt(2) e^{-y}, f3 = e^{-y}/nu, sigma12 = 0;
    con la condizione modificata c(sigma̅ + sigma12) + chi_hat(u1 + ū + sqrt(2) f3) = 0 si ottiene ū = -c sigma̅ / chi_hat
    """
    system = build_kramers3(nu)
    dec, spec = analyze_system(system, numerics)
    h = ExpPolyVec.exponential(1.0, [0.0, 1.0, 0.0])
    a = 0.5
    empty = BoundaryOperator(np.zeros((0, spec.dim)), np.zeros(0), "none")
    solution = solve(system, dec, spec, empty, h, a, numerics)
    coefficients = {}
    for i, label in enumerate(system.variable_labels()):
        coefficients[label] = {str(rate): coeffs[0].tolist() for rate, coeffs in solution.W.component(i).terms}
    u1 = solution.W.component(0)
    expected = {"u1": -math.sqrt(2.0) / nu, "f3": 1.0 / nu, "sigma12": 0.0}
    error = max(abs(solution.W(0.0)[i] - expected[label]) for i, label in enumerate(("u1", "f3", "sigma12")))

    bc = assemble_modified_bc(system, "identity", chi, c, numerics)
    layer = solve_layer_with_maxwell(system, dec, spec, bc, np.array([sigma_bar]), np.zeros(system.m),
                                     h, a, numerics)
    return {
        "system": _system_header(system),
        "source": h.to_dict(),
        "solution_terms": coefficients,
        "u1_trace": float(u1(0.0)[0]),
        "expected_traces": expected,
        "max_trace_error": float(error),
        "residual_sup": solution.residual_sup,
        "estimate_ratio": solution.norms["ratio"],
        "modified_bc": {"chi": chi, "chi_hat": bc.chi_hat, "c": c, "sigma_bar": sigma_bar,
                        "u_bar": float(layer.compat[0]), "u_bar_expected": -c * sigma_bar / bc.chi_hat},
    }


def cmd_demo(config: RunConfig) -> Tuple[int, Dict[str, Any]]:
    return EXIT_OK, kramers_demo(config.numerics)


HANDLERS = {
    "analyze": cmd_analyze,
    "check-bc": cmd_check_bc,
    "solve": cmd_solve,
    "probe": cmd_probe,
    "demo": cmd_demo,
}


def run(config: RunConfig) -> int:
    """
    Esegue il comando e scrive il report

    Returns:
        Codice di uscita (0 oppure 2 per condizioni mal poste)
    """
    config.numerics.setup_logging()
    logger.log_pipeline_step("comando", config.command, "CLI")
    status, report = HANDLERS[config.command](config)
    if "_csv" in report:
        frame = report["_csv"]
        write_output(frame.to_csv(index=False, float_format="%.17g"), config.out)
    else:
        write_output(render_json(report), config.out)
    return status


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Punto d'ingresso della CLI"""
    handler = get_error_handler()
    try:
        config = parse_args(argv)
    except GradHalfspaceError as e:
        sys.stderr.write(render_json(e.to_dict()) + "\n")
        return e.exit_status
    except SystemExit as e:
        # --help
        return int(e.code or 0)
    success, status, error = handler.safe_execute(run, config, context=config.command)
    if not success:
        sys.stderr.write(render_json(error.to_dict()) + "\n")
        return handler.exit_status_for(error)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
