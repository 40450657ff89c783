"""
Run tracking for credit-impact-bench
Per-repetition status and timing, kept out of the deterministic artifacts
"""

import json
import os
from datetime import datetime
from typing import Any, Dict, Optional


class RunTracker:
    def __init__(self, log_file="run_log.json"):
        self.log_file = str(log_file)
        self.current_run = {
            "start_time": None,
            "end_time": None,
            "command": "",
            "run_id": "",
            "repetitions": [],
            "succeeded": 0,
            "failed": 0,
        }

    def start_run(self, command: str, run_id: str = ""):
        """Start tracking a new run"""
        self.current_run = {
            "start_time": datetime.now().isoformat(),
            "end_time": None,
            "command": command,
            "run_id": run_id,
            "repetitions": [],
            "succeeded": 0,
            "failed": 0,
        }

    def track_repetition(self, index: int, success: bool, error: Optional[str] = None,
                         error_type: Optional[str] = None, seconds: Optional[float] = None):
        """Record the outcome of one repetition"""
        entry: Dict[str, Any] = {"repetition": index, "success": success}
        if seconds is not None:
            entry["seconds"] = round(seconds, 3)
        if not success:
            entry["error"] = error
            entry["error_type"] = error_type
        self.current_run["repetitions"].append(entry)
        self.current_run["succeeded" if success else "failed"] += 1

    def end_run(self) -> Dict[str, Any]:
        """End tracking, append to the log file and print a summary"""
        self.current_run["end_time"] = datetime.now().isoformat()
        self.current_run["repetitions"].sort(key=lambda entry: entry["repetition"])

        # Load existing data
        if os.path.exists(self.log_file):
            with open(self.log_file, 'r') as f:
                data = json.load(f)
        else:
            data = {"runs": []}

        data["runs"].append(self.current_run)

        total = sum(r["succeeded"] + r["failed"] for r in data["runs"])
        failed = sum(r["failed"] for r in data["runs"])
        data["summary"] = {
            "total_runs": len(data["runs"]),
            "total_repetitions": total,
            "failed_repetitions": failed,
            "last_updated": datetime.now().isoformat(),
        }

        directory = os.path.dirname(self.log_file)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(self.log_file, 'w') as f:
            json.dump(data, f, indent=2)

        print(f"\n📊 Run Summary ({self.current_run['command']}):")
        print(f"   Run id: {self.current_run['run_id'] or '-'}")
        print(f"   Succeeded: {self.current_run['succeeded']}")
        print(f"   Failed: {self.current_run['failed']}")
        if self.current_run["failed"]:
            print("   ⚠️ WARNING: some repetitions failed, see the run log for details.")
        return self.current_run

    @property
    def partial(self) -> bool:
        return self.current_run["failed"] > 0

    def get_run_report(self) -> Dict[str, Any]:
        """Get the full run log"""
        if os.path.exists(self.log_file):
            with open(self.log_file, 'r') as f:
                return json.load(f)
        return {"runs": [], "summary": {}}
