"""Командная строка: фиты трасс и свипов, калибровка, XPS, генерация и отчёты."""

import argparse
import math
import sys
from typing import Any, Dict, Optional, Sequence

from .analyzer import ResonatorAnalyzer
from .core.errors import ResLabError, ValidationError
from .core.trace import TraceFormat
from .fitters.notch_fitter import JSON_FIELDS, NotchFit, NotchParams
from .fitters.tls_fitter import ModelVariant, TLSParams
from .physics.photons import AttenuationChain
from .physics.reference_table import DEFAULT_N_C, get_row
from .physics.xps import PRESETS, XPSConstants
from .synth.generator import NoiseKind, NoiseSpec
from .utils.config_loader import ConfigLoader
from .utils.console import log

# Окно синтетической трассы по умолчанию: f_r ± SYNTH_HALF_WIDTH · f_r/Q_l
SYNTH_HALF_WIDTH = 5.0


class ArgumentParser(argparse.ArgumentParser):
    """argparse, у которого ошибки разбора становятся ValidationError (код 1)."""

    def error(self, message: str) -> None:
        raise ValidationError(f"{self.prog}: {message}")


class ResLabApp:
    """Приложение командной строки для анализа потерь в резонаторах."""

    def __init__(self, config_path: str):
        """
        Инициализация приложения.

        Args:
            config_path: Путь к файлу конфигурации
        """
        self.config_loader = ConfigLoader(config_path)
        self.analyzer = ResonatorAnalyzer(self.config_loader)
        self.parser = self._build_parser()

    def _build_parser(self) -> ArgumentParser:
        common = ArgumentParser(add_help=False)
        common.add_argument("--out", help="Файл результата (по умолчанию stdout)")
        common.add_argument("--seed", type=int, help="Зерно генератора (RESLAB_SEED важнее)")
        common.add_argument("-v", "--verbose", action="store_true", help="Печатать этапы фитов")

        parser = ArgumentParser(
            prog="reslab",
            description="Анализ потерь в сверхпроводящих резонаторах",
        )
        commands = parser.add_subparsers(dest="command", metavar="command")
        commands.required = True

        fit_s21 = commands.add_parser("fit-s21", parents=[common], help="Фит трасс S21")
        fit_s21.add_argument("traces", nargs="+", help="CSV-файлы трасс")
        fit_s21.add_argument("--background", help="Фон, снятый выше T_c")
        fit_s21.add_argument(
            "--in-format",
            choices=[f.value for f in TraceFormat],
            default=TraceFormat.RE_IM.value,
        )
        fit_s21.add_argument("--no-refine", action="store_true", help="Без совместного уточнения")
        fit_s21.add_argument("--jobs", type=int, default=1, help="Параллельных фитов")
        fit_s21.add_argument("--plot", help="SVG окружности (для одной трассы)")
        fit_s21.add_argument("--format", choices=["json", "csv"], default="json")
        fit_s21.set_defaults(handler=self.cmd_fit_s21)

        fit_tls = commands.add_parser("fit-tls", parents=[common], help="Фит модели TLS")
        fit_tls.add_argument("sweep", help="CSV свипа n_mean,qi[,qi_sigma]")
        fit_tls.add_argument("--fr", type=float, required=True, help="f_r, Гц")
        fit_tls.add_argument("--temp", type=float, help="Температура, К")
        fit_tls.add_argument(
            "--model-variant",
            choices=[v.value for v in ModelVariant]
            + [v.value.replace("_", "-") for v in ModelVariant],
        )
        fit_tls.add_argument("--qc", type=float, help="|Q_c| для отчёта")
        fit_tls.add_argument("--plot", help="SVG Q_i(⟨n⟩) с кривой фита")
        fit_tls.add_argument(
            "--bootstrap", type=int, help="Погрешности по N повторам bootstrap"
        )
        fit_tls.add_argument("--format", choices=["json", "csv"], default="json")
        fit_tls.set_defaults(handler=self.cmd_fit_tls)

        photons = commands.add_parser("photons", parents=[common], help="⟨n⟩ по мощности генератора")
        photons.add_argument("--source-dbm", type=float, required=True)
        photons.add_argument("--chain", help='JSON {"stages": [{"label", "db"}]}')
        photons.add_argument("--fr", type=float, required=True)
        photons.add_argument("--ql", type=float, required=True)
        photons.add_argument("--qc", type=float, required=True)
        photons.add_argument("--target-n", type=float, help="Найти мощность для этого ⟨n⟩")
        photons.add_argument("--format", choices=["json", "csv"], default="json")
        photons.set_defaults(handler=self.cmd_photons)

        xps = commands.add_parser("xps", parents=[common], help="Толщина оксида по XPS")
        value = xps.add_mutually_exclusive_group(required=True)
        value.add_argument("--ratio", type=float, help="I_ox / I_m")
        value.add_argument("--thickness", type=float, help="Толщина, нм")
        xps.add_argument("--preset", default="ta4f", help=f"Набор констант ({', '.join(PRESETS)})")
        xps.add_argument("--constants", help="JSON {lambda_ox, r0, theta}")
        xps.add_argument("--lambda-ox", type=float)
        xps.add_argument("--r0", type=float)
        xps.add_argument("--theta", type=float, default=math.pi / 2)
        xps.add_argument("--format", choices=["json", "csv"], default="json")
        xps.set_defaults(handler=self.cmd_xps)

        synth = commands.add_parser("synth", help="Синтетические трассы и свипы")
        kinds = synth.add_subparsers(dest="kind", metavar="kind")
        kinds.required = True
        noise_kinds = [k.value for k in NoiseKind]

        trace = kinds.add_parser("trace", parents=[common], help="Трасса S21")
        trace.add_argument("--fr", type=float, required=True)
        trace.add_argument("--ql", type=float, required=True)
        trace.add_argument("--qc", type=float, required=True)
        trace.add_argument("--phi", type=float, default=0.0)
        trace.add_argument("--a", type=float, default=1.0)
        trace.add_argument("--alpha", type=float, default=0.0)
        trace.add_argument("--tau", type=float, default=0.0)
        trace.add_argument("--f-min", type=float)
        trace.add_argument("--f-max", type=float)
        trace.add_argument("--points", type=int, default=1001)
        trace.add_argument("--noise", choices=noise_kinds, default="none")
        trace.add_argument("--sigma", type=float, default=0.0)
        trace.add_argument(
            "--trace-format",
            choices=[f.value for f in TraceFormat],
            default=TraceFormat.RE_IM.value,
        )
        trace.set_defaults(handler=self.cmd_synth_trace)

        sweep = kinds.add_parser("sweep", parents=[common], help="Свип Q_i(⟨n⟩)")
        sweep.add_argument("--row", help="Параметры из строки опубликованной сводки")
        sweep.add_argument("--f-tls0", type=float)
        sweep.add_argument("--beta", type=float)
        sweep.add_argument("--tan-other", type=float, default=None)
        sweep.add_argument("--n-c", type=float, default=DEFAULT_N_C)
        sweep.add_argument("--fr", type=float)
        sweep.add_argument("--temp", type=float)
        sweep.add_argument("--n-min", type=float, default=1.0)
        sweep.add_argument("--n-max", type=float, default=1e7)
        sweep.add_argument("--points", type=int, default=25)
        sweep.add_argument("--noise", choices=noise_kinds, default="none")
        sweep.add_argument("--sigma", type=float, default=0.0)
        sweep.set_defaults(handler=self.cmd_synth_sweep)

        report = commands.add_parser("report", parents=[common], help="Сравнение двух фитов TLS")
        report.add_argument("before", help="JSON фита до хранения")
        report.add_argument("after", help="JSON фита после хранения")
        report.add_argument("--format", choices=["markdown", "csv", "json"], default="markdown")
        report.set_defaults(handler=self.cmd_report)

        table = commands.add_parser("table", parents=[common], help="Проверка опубликованной сводки")
        table.add_argument("--temp", type=float)
        table.add_argument("--format", choices=["markdown", "csv", "json"], default="markdown")
        table.set_defaults(handler=self.cmd_table)

        return parser

    def run(self, argv: Optional[Sequence[str]] = None) -> int:
        """
        Разбирает аргументы и выполняет команду.

        Returns:
            Код завершения: 0 успех, 1 ошибка ввода, 2 численный сбой
        """
        try:
            args = self.parser.parse_args(argv)
            if getattr(args, "verbose", False):
                self.analyzer.notch_fitter.verbose = True
                self.analyzer.tls_fitter.verbose = True
            return args.handler(args)
        except ResLabError as e:
            log(str(e), "❌")
            return e.exit_code
        except OSError as e:
            log(f"Ошибка ввода-вывода: {e}", "❌")
            return 1
        except SystemExit as e:
            # --help печатает справку и завершает разбор
            return e.code if isinstance(e.code, int) else 0

    def _emit(self, text: str, out: Optional[str]) -> None:
        """Пишет результат в файл или в stdout."""
        if not text.endswith("\n"):
            text += "\n"
        if out:
            with open(out, "w", encoding="utf-8") as f:
                f.write(text)
            log(f"Результат записан: {out}", "💾")
        else:
            sys.stdout.write(text)

    @staticmethod
    def _fit_record(path: str, fit: NotchFit) -> Dict[str, Any]:
        record: Dict[str, Any] = {"source": path}
        record.update(fit.to_dict())
        record["refined"] = fit.refined
        return record

    # --- команды ---

    def cmd_fit_s21(self, args: argparse.Namespace) -> int:
        if args.jobs < 1:
            raise ValidationError("--jobs должно быть ≥ 1")
        if args.plot and len(args.traces) > 1:
            raise ValidationError("--plot поддерживается только для одной трассы")

        fits = self.analyzer.fit_traces(
            args.traces,
            args.background,
            TraceFormat(args.in_format),
            refine=False if args.no_refine else None,
            jobs=args.jobs,
            plot_path=args.plot,
        )

        records = [self._fit_record(path, fit) for path, fit in fits]
        formatter = self.analyzer.formatter
        if args.format == "csv":
            header = ("source", *JSON_FIELDS, "refined")
            rows = [[rec[key] for key in header] for rec in records]
            text = formatter.format_csv(header, rows)
        elif len(records) == 1:
            text = formatter.format_json(records[0])
        else:
            text = formatter.format_json(records)
        self._emit(text, args.out)
        return 0

    def cmd_fit_tls(self, args: argparse.Namespace) -> int:
        result = self.analyzer.fit_sweep(
            args.sweep,
            args.fr,
            temperature=args.temp,
            variant=args.model_variant,
            q_c=args.qc,
            plot_path=args.plot,
            bootstrap=args.bootstrap,
            seed=self.analyzer.validator.seed(args.seed),
        )
        self._emit(
            self.analyzer.formatter.format_record(result.to_dict(), args.format),
            args.out,
        )
        return 0

    def cmd_photons(self, args: argparse.Namespace) -> int:
        chain = None
        if args.chain:
            chain = AttenuationChain.from_config(
                self.analyzer.validator.json_object(args.chain, "цепочка ослаблений")
            )
        record = self.analyzer.photons(
            args.source_dbm, args.fr, args.ql, args.qc, chain, args.target_n
        )
        log(
            f"P = {record['applied_power_w']:.4g} Вт, ⟨n⟩ = {record['n_mean']:.4g}",
            "✅",
        )
        self._emit(
            self.analyzer.formatter.format_record(record, args.format), args.out
        )
        return 0

    def _xps_constants(self, args: argparse.Namespace) -> XPSConstants:
        if args.constants:
            data = self.analyzer.validator.json_object(args.constants, "константы XPS")
            return XPSConstants.from_config(data, label=args.constants)
        if args.lambda_ox is not None or args.r0 is not None:
            if args.lambda_ox is None or args.r0 is None:
                raise ValidationError("Нужны оба параметра: --lambda-ox и --r0")
            return XPSConstants(args.lambda_ox, args.r0, args.theta)
        return self.analyzer.xps_preset(args.preset)

    def cmd_xps(self, args: argparse.Namespace) -> int:
        record = self.analyzer.xps(
            self._xps_constants(args), ratio=args.ratio, thickness=args.thickness
        )
        self._emit(
            self.analyzer.formatter.format_record(record, args.format), args.out
        )
        return 0

    def _noise(self, args: argparse.Namespace) -> NoiseSpec:
        seed = self.analyzer.validator.seed(args.seed)
        return NoiseSpec(NoiseKind(args.noise), args.sigma, seed)

    @staticmethod
    def _require_out(args: argparse.Namespace) -> str:
        if not args.out:
            raise ValidationError("Для synth нужен --out")
        return args.out

    def cmd_synth_trace(self, args: argparse.Namespace) -> int:
        out = self._require_out(args)
        params = NotchParams(
            args.fr, args.ql, args.qc, args.phi, args.a, args.alpha, args.tau
        )
        half_width = SYNTH_HALF_WIDTH * args.fr / args.ql
        f_min = args.fr - half_width if args.f_min is None else args.f_min
        f_max = args.fr + half_width if args.f_max is None else args.f_max
        self.analyzer.synth_trace(
            params,
            f_min,
            f_max,
            args.points,
            self._noise(args),
            out,
            TraceFormat(args.trace_format),
        )
        return 0

    def _sweep_params(self, args: argparse.Namespace) -> TLSParams:
        if args.row:
            try:
                row = get_row(args.row)
            except KeyError:
                raise ValidationError(f"Нет строки сводки '{args.row}'") from None
            if args.fr is None:
                args.fr = row.f_r
            return TLSParams(
                args.f_tls0 if args.f_tls0 is not None else row.f_tls0,
                args.n_c,
                args.beta if args.beta is not None else row.beta,
                args.tan_other if args.tan_other is not None else row.tan_other,
            )
        if args.f_tls0 is None or args.beta is None:
            raise ValidationError("Задайте --row или --f-tls0 и --beta")
        return TLSParams(
            args.f_tls0,
            args.n_c,
            args.beta,
            0.0 if args.tan_other is None else args.tan_other,
        )

    def cmd_synth_sweep(self, args: argparse.Namespace) -> int:
        out = self._require_out(args)
        validator = self.analyzer.validator
        params = self._sweep_params(args)
        f_r = validator.positive(args.fr, "fr")
        temp = validator.positive(
            self.analyzer.default_temperature if args.temp is None else args.temp,
            "temp",
        )
        n_min = validator.positive(args.n_min, "n-min")
        n_max = validator.positive(args.n_max, "n-max")
        if n_max < n_min or args.points < 1:
            raise ValidationError("Нужно n-min ≤ n-max и points ≥ 1")
        grid = self.analyzer.log_grid(n_min, n_max, args.points)
        self.analyzer.synth_sweep(params, f_r, temp, grid, self._noise(args), out)
        return 0

    def cmd_report(self, args: argparse.Namespace) -> int:
        self._emit(self.analyzer.report(args.before, args.after, args.format), args.out)
        return 0

    def cmd_table(self, args: argparse.Namespace) -> int:
        self._emit(self.analyzer.table(args.temp, args.format), args.out)
        return 0

