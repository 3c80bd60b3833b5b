from pathlib import Path
from typing import Optional

import aiosqlite


class RunLogger:
    def __init__(self, db_path: Path) -> None:
        self.db_path = db_path

    async def init_db(self) -> None:
        async with aiosqlite.connect(self.db_path) as db:
            await db.execute(
                """
                CREATE TABLE IF NOT EXISTS runs (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    command TEXT NOT NULL,
                    target TEXT NOT NULL,
                    seed INTEGER,
                    tol REAL,
                    timestamp DATETIME DEFAULT CURRENT_TIMESTAMP,
                    passed INTEGER,
                    failed INTEGER,
                    untestable INTEGER,
                    error TEXT
                )
                """
            )
            await db.commit()

    async def log_run(
        self,
        command: str,
        target: str,
        seed: Optional[int] = None,
        tol: Optional[float] = None,
        passed: Optional[int] = None,
        failed: Optional[int] = None,
        untestable: Optional[int] = None,
        error: Optional[str] = None,
    ) -> None:
        async with aiosqlite.connect(self.db_path) as db:
            await db.execute(
                """
                INSERT INTO runs (command, target, seed, tol, passed, failed, untestable, error)
                VALUES (?, ?, ?, ?, ?, ?, ?, ?)
                """,
                (command, target, seed, tol, passed, failed, untestable, error),
            )
            await db.commit()
