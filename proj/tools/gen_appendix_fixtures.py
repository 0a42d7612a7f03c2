#!/usr/bin/env python3
"""Builds the offline fixtures for the RQ3 appendix suite.

For every question in suites/rq3_appendix.txt this writes
  * an expected-result descriptor (suites/rq3_appendix.expected.json), which
    the judge turns into oracle rows against whatever store is loaded, and
  * mock rules (suites/rq3_appendix.mock.json): the tool call a competent
    model would make, and the SQL a competent model would write for the
    text-to-SQL baseline.

The interpretation of each question is decided here, by hand-written rules,
and is the same for both systems. Mock latency follows a fixed model of
400 ms per call plus 12 ms per generated token (4 characters per token), so
neither system is given a hand-picked speed.

Usage: gen_appendix_fixtures.py [repo_root]
"""

import csv
import json
import re
import sys
from pathlib import Path

ROOT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent

OVERHEAD_MS = 400
MS_PER_TOKEN = 12


def latency_for(text):
    return OVERHEAD_MS + MS_PER_TOKEN * ((len(text) + 3) // 4)


def fold(text):
    text = text.lower().replace("&", " and ")
    text = re.sub(r"[^a-z0-9]+", " ", text)
    return " ".join(text.split())


def load_vocabulary():
    phrases = {}
    with open(ROOT / "data" / "metrics.csv", newline="") as f:
        rows = [line for line in f if not line.startswith("#")]
    for row in csv.DictReader(rows):
        metric = row["metric"]
        phrases[fold(metric.replace("_", " "))] = metric
        for s in row["synonyms"].split("|"):
            if s:
                phrases[fold(s)] = metric
    # Ids that are abbreviations of their usual names.
    phrases[fold("r&d expense")] = "rnd_expense"
    phrases[fold("sg&a expense")] = "sgna_expense"
    return phrases


def load_companies():
    names = {}
    tickers = set()
    with open(ROOT / "data" / "companies.csv", newline="") as f:
        for row in csv.DictReader(f):
            t = row["ticker"]
            tickers.add(t)
            names[row["name"].lower()] = t
            for a in row["aliases"].split("|"):
                if a:
                    names[a.lower()] = t
    return names, tickers


VOCAB = load_vocabulary()
NAMES, TICKERS = load_companies()


def metric_id(phrase):
    key = fold(phrase)
    # "EPS (diluted)" and "EPS (basic)" fold to "eps diluted" / "eps basic".
    if key in VOCAB:
        return VOCAB[key]
    raise SystemExit(f"no metric for '{phrase}'")


def entity(word):
    """Returns (argument as a model would pass it, ticker)."""
    if word in TICKERS:
        return word, word
    t = NAMES.get(word.lower())
    if t is None:
        raise SystemExit(f"unknown company '{word}'")
    return word, t


def q(s):
    return "'" + s.replace("'", "''") + "'"


STATEMENTS = {
    "income statement": "income_statement",
    "balance sheet": "balance_sheet",
    "cash flow statement": "cash_flow",
}

POSSESSIVE = r"(?P<who>[A-Za-z][A-Za-z.\-]*)['’]s"


def price_sql(ticker, window, periodicity):
    cols = "ticker, date, close"
    if "n_days" in window:
        return (f"SELECT {cols} FROM (SELECT {cols} FROM prices WHERE ticker = {q(ticker)} "
                f"ORDER BY date DESC LIMIT {window['n_days']}) ORDER BY date")
    if "lookback" in window:
        n, unit = window["lookback"]["count"], window["lookback"]["unit"]
        latest = f"(SELECT MAX(date) FROM prices WHERE ticker = {q(ticker)})"
        if unit == "weeks":
            start = f"date({latest}, '-{7 * n - 1} days')"
        else:
            start = f"date({latest}, '-{n} {unit}', '+1 day')"
        where = f"ticker = {q(ticker)} AND date >= {start}"
    else:
        where = f"ticker = {q(ticker)} AND date BETWEEN {q(window['start'])} AND {q(window['end'])}"
    if periodicity == "daily":
        return f"SELECT {cols} FROM prices WHERE {where} ORDER BY date"
    bucket = {"weekly": "strftime('%Y-%W', date)", "monthly": "strftime('%Y-%m', date)",
              "yearly": "strftime('%Y', date)"}[periodicity]
    # SQLite returns the other columns from the MAX(date) row.
    return (f"SELECT ticker, MAX(date) AS date, close FROM prices WHERE {where} "
            f"GROUP BY {bucket} ORDER BY date")


def fundamental_sql(ticker, metric, n, freq):
    cols = "ticker, fiscal_period, period_end_date, metric, value"
    return (f"SELECT {cols} FROM (SELECT {cols} FROM fundamentals WHERE ticker = {q(ticker)} "
            f"AND metric = {q(metric)} AND period_kind = {q(freq)} "
            f"ORDER BY period_end_date DESC LIMIT {n}) ORDER BY period_end_date")


def statement_sql(ticker, kind, freq, n=None, span=None):
    head = ("SELECT f.ticker, f.fiscal_period, f.period_end_date, f.metric, f.value "
            "FROM fundamentals f JOIN metrics m ON m.metric = f.metric "
            f"WHERE f.ticker = {q(ticker)} AND m.statement_kind = {q(kind)} "
            f"AND f.period_kind = {q(freq)} ")
    if span:
        cond = f"AND f.fiscal_period BETWEEN {q(span[0])} AND {q(span[1])} "
    else:
        cond = (f"AND f.period_end_date IN (SELECT DISTINCT period_end_date FROM fundamentals "
                f"WHERE ticker = {q(ticker)} AND period_kind = {q(freq)} "
                f"ORDER BY period_end_date DESC LIMIT {n}) ")
    return head + cond + "ORDER BY f.period_end_date, m.ordinal"


def interpret(query):
    """Returns (function, arguments, expected descriptor, baseline SQL)."""
    s = query.strip().rstrip(".")

    # Statements first: "the <statement> for X ..." or "X's <statement> ...".
    m = re.match(r"Return the (?P<st>income statement|balance sheet|cash flow statement) "
                 r"for (?P<who>\S+) for the (?:last|past) (?P<n>\d+) (?P<u>quarters?|years?)$", s)
    if not m:
        m = re.match(r"Return " + POSSESSIVE + r" (?P<st>income statement|balance sheet|cash flow "
                     r"statement) for the (?:last|past) (?P<n>\d+) (?P<u>quarters?|years?)$", s)
    if m:
        arg, t = entity(m["who"])
        kind = STATEMENTS[m["st"]]
        freq = "yearly" if m["u"].startswith("year") else "quarterly"
        n = int(m["n"])
        args = {"ticker": arg, "statement_kind": kind, "frequency": freq, "n_periods": n}
        exp = {"kind": "statement", "ticker": t, "statement": kind, "n_periods": n, "frequency": freq}
        return "get_financial_statement", args, exp, statement_sql(t, kind, freq, n=n)

    m = re.match(r"Return " + POSSESSIVE + r" (?P<st>income statement|balance sheet|cash flow "
                 r"statement) (?:between|from|for) (?P<a>\d{4})(?: Q(?P<aq>[1-4]))? (?:and|to) "
                 r"(?P<b>\d{4})(?: Q(?P<bq>[1-4]))?$", s)
    if m:
        arg, t = entity(m["who"])
        kind = STATEMENTS[m["st"]]
        if m["aq"]:
            span = (f"{m['a']}Q{m['aq']}", f"{m['b']}Q{m['bq']}")
        else:
            span = (f"{m['a']}FY", f"{m['b']}FY")
        freq = "quarterly" if m["aq"] else "yearly"
        args = {"ticker": arg, "statement_kind": kind, "from_period": span[0], "to_period": span[1]}
        exp = {"kind": "statement", "ticker": t, "statement": kind, "from": span[0], "to": span[1]}
        return "get_financial_statement", args, exp, statement_sql(t, kind, freq, span=span)

    # Prices.
    m = re.match(r"(?:Return|Show) " + POSSESSIVE + r" (?:stock price|daily closing price) "
                 r"(?P<rest>.*)$", s)
    if m:
        arg, t = entity(m["who"])
        rest = m["rest"]
        periodicity = "daily"
        pm = re.search(r" with (daily|weekly|monthly|yearly) periodicity$", rest)
        if pm:
            periodicity = pm.group(1)
            rest = rest[: pm.start()]
        args = {"ticker": arg}
        window = {}
        wm = re.match(r"for the past (\d+) (day|week|month|year)s?$", rest)
        rm = re.match(r"(?:between|from) (\d{4}-\d{2}-\d{2}) (?:and|to) (\d{4}-\d{2}-\d{2})$", rest)
        if wm:
            n, unit = int(wm.group(1)), wm.group(2) + "s"
            if unit == "days":
                # "last N days" counts trading days.
                window = {"n_days": n}
                args["n_days"] = n
            else:
                window = {"lookback": {"count": n, "unit": unit}}
                args["lookback_count"] = n
                args["lookback_unit"] = unit
        elif rm:
            window = {"start": rm.group(1), "end": rm.group(2)}
            args["start_date"] = rm.group(1)
            args["end_date"] = rm.group(2)
        else:
            raise SystemExit(f"unhandled price window: {query}")
        if periodicity != "daily":
            args["periodicity"] = periodicity
        exp = {"kind": "price", "ticker": t, **window, "periodicity": periodicity, "fields": ["close"]}
        return "get_stock_price", args, exp, price_sql(t, window, periodicity)

    # Single fundamental metric.
    m = re.match(r"Return " + POSSESSIVE + r" (?:(?P<freq>quarterly|yearly) )?(?P<metric>.+?) "
                 r"for (?:the (?:last|past) )?(?P<n>\d+) (?P<u>quarters?|years?)$", s)
    if m:
        arg, t = entity(m["who"])
        metric = metric_id(m["metric"])
        freq = m["freq"] or ("yearly" if m["u"].startswith("year") else "quarterly")
        n = int(m["n"])
        args = {"ticker": arg, "metric": metric, "n_periods": n, "frequency": freq}
        exp = {"kind": "fundamental", "ticker": t, "metric": metric, "n_periods": n,
               "frequency": freq}
        return "get_fundamental_metric", args, exp, fundamental_sql(t, metric, n, freq)

    raise SystemExit(f"unhandled query: {query}")


def main():
    suite = ROOT / "suites" / "rq3_appendix.txt"
    queries = [line.strip() for line in suite.read_text(encoding="utf-8").splitlines() if line.strip()]
    cases = []
    rules = []
    for query in queries:
        fn, args, exp, sql = interpret(query)
        cases.append({"query": query, "expected": exp})
        call = {"name": fn, "arguments": args}
        rules.append({
            "name": f"route: {query}",
            "match": {"role": "user", "equals": query, "has_tools": True},
            "response": {"tool_calls": [call]},
            "latency_ms": latency_for(json.dumps(call)),
        })
        reply = f"```sql\n{sql};\n```"
        rules.append({
            "name": f"sql: {query}",
            "match": {"role": "user", "equals": query, "has_tools": False},
            "response": {"text": reply},
            "latency_ms": latency_for(reply),
        })
    summary = "Here is the requested data; the rows are listed in the attached table."
    rules.append({
        "name": "summarize tool results",
        "match": {"role": "tool"},
        "response": {"text": summary},
        "latency_ms": latency_for(summary),
    })
    (ROOT / "suites" / "rq3_appendix.expected.json").write_text(
        json.dumps({"cases": cases}, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    (ROOT / "suites" / "rq3_appendix.mock.json").write_text(
        json.dumps({"rules": rules}, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    print(f"{len(cases)} cases, {len(rules)} rules")


if __name__ == "__main__":
    main()
