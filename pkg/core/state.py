from typing import Any, Dict, List, Optional, TypedDict


class RunState(TypedDict):
    command: str
    fn_id: str
    fn_params: Dict[str, float]

    seed: Optional[int]
    workers: int

    generations: List[int]
    method: Optional[str]

    config: Dict[str, Any]
    output_files: List[str]

    checks_run: List[str]
    checks_failed: List[str]

    history: List[str]

    exit_code: int
    done: bool
