"""Форматирование результатов: таблицы Markdown, CSV и JSON."""

import csv
import io
import json
import math
from typing import Any, Dict, List, Optional, Sequence

from ..fitters.tls_fitter import TLSFitResult
from ..physics.aging import AgingDelta
from ..physics.reference_table import (
    LOOSE_TOLERANCE_PCT,
    TIGHT_TOLERANCE_PCT,
    ConsistencyRow,
    consistency_summary,
)

# Порядок колонок совпадает с опубликованной сводкой резонаторов
REPORT_COLUMNS = (
    "f_r (GHz)",
    "Q_c (×10⁶)",
    "Q_i,LP (×10⁶)",
    "F·tanδ⁰ (×10⁻⁶)",
    "tanδ_other (×10⁻⁶)",
    "β",
)


class ReportFormatter:
    """Форматирует результаты фитов для вывода или записи в файл."""

    def __init__(self, config: Dict[str, Any]):
        """
        Инициализация форматтера.

        Args:
            config: Секция output
        """
        self.show_emoji = config.get("show_emoji", True)
        self.float_digits = int(config.get("float_digits", 4))

    def _num(self, value: Optional[float], scale: float = 1.0) -> str:
        """Число в масштабе таблицы; пустое значение — прочерк."""
        if value is None or (isinstance(value, float) and math.isnan(value)):
            return "—"
        return f"{value / scale:.{self.float_digits}g}"

    def _table_row(self, result: TLSFitResult) -> List[str]:
        p = result.params
        return [
            self._num(result.f_r, 1e9),
            self._num(result.q_c, 1e6),
            self._num(result.q_i_lp, 1e6),
            self._num(p.f_tls0, 1e-6),
            self._num(p.tan_other, 1e-6),
            self._num(p.beta),
        ]

    def format_json(self, data: Any) -> str:
        return json.dumps(data, indent=2, ensure_ascii=False)

    def format_csv(self, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return buffer.getvalue()

    def format_record(self, record: Dict[str, Any], fmt: str = "json") -> str:
        """
        Плоский словарь результатов как JSON или CSV (``key,value``).

        Args:
            record: Результат команды
            fmt: ``json`` или ``csv``
        """
        if fmt == "csv":
            rows = [
                [key, json.dumps(value) if isinstance(value, (list, dict)) else value]
                for key, value in record.items()
            ]
            return self.format_csv(("key", "value"), rows)
        return self.format_json(record)

    def format_report(self, delta: AgingDelta, fmt: str = "markdown") -> str:
        """
        Пара строк в формате сводки резонаторов плюс изменения при старении.

        Args:
            delta: Результат aging_report
            fmt: ``markdown``, ``csv`` или ``json``

        Returns:
            Отформатированный отчёт
        """
        if fmt == "json":
            return self.format_json(
                {
                    "before": delta.before.to_dict(),
                    "after": delta.after.to_dict(),
                    "aging": delta.to_dict(),
                }
            )

        before = self._table_row(delta.before)
        after = self._table_row(delta.after)

        if fmt == "csv":
            rows = [["before", *before], ["after", *after]]
            table = self.format_csv(("epoch", *REPORT_COLUMNS), rows)
            deltas = self.format_csv(
                ("f_tls0_change_pct", "tan_other_delta", "q_i_lp_delta", "q_i_lp_change_pct"),
                [[
                    f"{delta.f_tls0_change_pct:+.1f}",
                    repr(delta.tan_other_delta),
                    repr(delta.q_i_lp_delta),
                    f"{delta.q_i_lp_change_pct:+.1f}",
                ]],
            )
            return table + "\n" + deltas

        emoji = "📊 " if self.show_emoji else ""
        lines = [
            f"### {emoji}Сводка резонатора",
            "",
            "| Эпоха | " + " | ".join(REPORT_COLUMNS) + " |",
            "|---" * (len(REPORT_COLUMNS) + 1) + "|",
            "| до | " + " | ".join(before) + " |",
            "| после | " + " | ".join(after) + " |",
            "",
            f"### {'⏳ ' if self.show_emoji else ''}Изменения",
            "",
            f"- F·tanδ⁰: {delta.f_tls0_change_label}",
            f"- Δtanδ_other: {self._signed(delta.tan_other_delta, 1e-6)}×10⁻⁶",
            f"- ΔQ_i,LP: {self._signed(delta.q_i_lp_delta, 1e6)}×10⁶ "
            f"({delta.q_i_lp_change_pct:+.1f}%)",
        ]
        return "\n".join(lines) + "\n"

    def _signed(self, value: float, scale: float) -> str:
        return f"{value / scale:+.{self.float_digits}g}"

    def format_consistency(self, report: List[ConsistencyRow], fmt: str = "markdown") -> str:
        """Таблица согласованности Q_i,LP со сводкой."""
        summary = consistency_summary(report)
        records = [
            {
                "row": r.row.key,
                "stack": r.row.stack,
                "exposure": r.row.exposure,
                "q_i_lp_reported": r.row.q_i_lp,
                "q_i_lp_predicted": r.predicted,
                "deviation_pct": r.deviation_pct,
            }
            for r in report
        ]
        if fmt == "json":
            return self.format_json({"rows": records, "summary": summary})
        if fmt == "csv":
            header = tuple(records[0]) if records else ()
            return self.format_csv(header, [list(rec.values()) for rec in records])

        lines = [
            "| Структура | Время на воздухе | Q_i,LP опубл. (×10⁶) "
            "| Q_i,LP модель (×10⁶) | Отклонение |",
            "|---|---|---|---|---|",
        ]
        for r in report:
            mark = ""
            if self.show_emoji:
                mark = " ✅" if r.within_tight else (" ⚠️" if r.within_loose else " ❌")
            lines.append(
                f"| {r.row.stack} | {r.row.exposure} | {self._num(r.row.q_i_lp, 1e6)} "
                f"| {self._num(r.predicted, 1e6)} | {r.deviation_pct:+.1f}%{mark} |"
            )
        lines.append("")
        lines.append(
            f"В пределах {TIGHT_TOLERANCE_PCT:g}%: "
            f"{summary['within_tight']} из {summary['rows']}; "
            f"в пределах {LOOSE_TOLERANCE_PCT:g}%: "
            f"{summary['within_loose']} из {summary['rows']}"
        )
        return "\n".join(lines) + "\n"
