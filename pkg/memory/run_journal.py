"""
Run Journal - Iteration Records as JSON Lines
One JSON object per line, one line per IterationRecord
"""
import json
import logging
import os
from typing import Dict, Iterable, List

logger = logging.getLogger(__name__)


class RunJournal:
    """Appends serialized records to a JSON-lines file and reads them back"""

    def __init__(self, journal_file: str):
        self.journal_file = journal_file

    def write(self, records: Iterable, append: bool = False) -> int:
        """
        Write records (anything with to_dict())

        Returns:
            int: number of lines written
        """
        directory = os.path.dirname(self.journal_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        count = 0
        with open(self.journal_file, "a" if append else "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")
                count += 1
        logger.info(f"📝 Journal: wrote {count} records to {self.journal_file}")
        return count

    def read(self) -> List[Dict]:
        if not os.path.exists(self.journal_file):
            return []
        with open(self.journal_file, "r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
