#!/usr/bin/env python3

import sqlite3
from pathlib import Path

import fire  # type: ignore


def get_all_runs(db_file: str = "runs.db") -> None:
    db_path = Path(db_file)
    if not db_path.exists():
        print(f"Database file not found: {db_file}")
        return

    conn = sqlite3.connect(db_path)
    conn.row_factory = sqlite3.Row
    cursor = conn.cursor()

    cursor.execute(
        """
        SELECT
            command,
            target,
            COUNT(*) as count,
            SUM(CASE WHEN failed > 0 THEN 1 ELSE 0 END) as failing_runs,
            SUM(CASE WHEN error IS NOT NULL THEN 1 ELSE 0 END) as error_count,
            MAX(timestamp) as last_run
        FROM runs
        GROUP BY command, target
        ORDER BY count DESC
        """
    )

    rows = cursor.fetchall()

    if not rows:
        print("No runs found in database")
        conn.close()
        return

    print(f"\nDistinct command targets: {len(rows)}\n")
    print(f"{'Command':<10} {'Target':<20} {'Runs':<8} {'Failing':<9} {'Errors':<8} {'Last Run':<20}")
    print("=" * 80)

    for row in rows:
        print(
            f"{row['command']:<10} {row['target']:<20} {row['count']:<8} "
            f"{row['failing_runs']:<9} {row['error_count']:<8} {row['last_run']:<20}"
        )

    conn.close()


def get_recent_runs(limit: int = 20, db_file: str = "runs.db") -> None:
    db_path = Path(db_file)
    if not db_path.exists():
        print(f"Database file not found: {db_file}")
        return

    conn = sqlite3.connect(db_path)
    conn.row_factory = sqlite3.Row
    cursor = conn.cursor()

    cursor.execute(
        """
        SELECT id, command, target, seed, tol, timestamp, passed, failed, untestable, error
        FROM runs
        ORDER BY timestamp DESC, id DESC
        LIMIT ?
        """,
        (limit,),
    )

    rows = cursor.fetchall()

    if not rows:
        print("No runs found in database")
        conn.close()
        return

    print(f"\nLast {limit} runs:\n")
    print(f"{'ID':<6} {'Command':<8} {'Target':<16} {'Seed':<6} {'Pass/Fail/Unt':<15} {'Timestamp':<20} {'Error':<15}")
    print("=" * 100)

    for row in rows:
        seed = str(row["seed"]) if row["seed"] is not None else "-"
        if row["passed"] is None:
            counts = "N/A"
        else:
            counts = f"{row['passed']}/{row['failed'] or 0}/{row['untestable'] or 0}"
        error = row["error"] or "-"
        if len(error) > 15:
            error = error[:12] + "..."

        print(
            f"{row['id']:<6} {row['command']:<8} {row['target']:<16} {seed:<6} {counts:<15} "
            f"{row['timestamp']:<20} {error:<15}"
        )

    conn.close()


def get_stats(db_file: str = "runs.db") -> None:
    db_path = Path(db_file)
    if not db_path.exists():
        print(f"Database file not found: {db_file}")
        return

    conn = sqlite3.connect(db_path)
    cursor = conn.cursor()

    cursor.execute("SELECT COUNT(*) FROM runs")
    total_runs = cursor.fetchone()[0]

    cursor.execute("SELECT COUNT(*) FROM runs WHERE error IS NOT NULL")
    aborted_runs = cursor.fetchone()[0]

    cursor.execute("SELECT COUNT(*) FROM runs WHERE failed > 0")
    failing_runs = cursor.fetchone()[0]

    cursor.execute("SELECT AVG(passed) FROM runs WHERE command = 'verify' AND passed IS NOT NULL")
    avg_passed = cursor.fetchone()[0]

    print("\n=== Run Statistics ===")
    print(f"Total runs: {total_runs}")
    print(f"Aborted runs: {aborted_runs}")
    print(f"Runs with failing checks: {failing_runs}")
    print(f"Average passed checks per verify run: {avg_passed:.1f}" if avg_passed else "Average passed checks: N/A")

    cursor.execute(
        """
        SELECT target, seed, failed, timestamp
        FROM runs
        WHERE failed > 0
        ORDER BY timestamp DESC
        LIMIT 5
        """
    )

    failing = cursor.fetchall()
    if failing:
        print("\nLatest failing runs:")
        for i, (target, seed, failed, timestamp) in enumerate(failing, 1):
            print(f"  {i}. {target} seed={seed}: {failed} failed at {timestamp}")

    conn.close()


if __name__ == "__main__":
    fire.Fire(
        {
            "all": get_all_runs,
            "recent": get_recent_runs,
            "stats": get_stats,
        }
    )
