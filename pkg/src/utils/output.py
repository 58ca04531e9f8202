"""
결과 출력 (JSON / CSV)

실수는 모두 '.17g' 로 적어 왕복 변환 시 비트 단위로 같은 값을 얻습니다.
"""
import csv
import io
import json
import logging
import math
import re
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional, Sequence, TextIO

import numpy as np

from ..errors import ConfigError

logger = logging.getLogger(__name__)

PATH_COLUMNS = ("sample", "path", "time", "value")

# json 은 float 을 repr 로만 쓰므로 표시된 문자열로 넘긴 뒤 따옴표를 벗김
_FLOAT_MARK = "__f17__"
_MARKED_FLOAT = re.compile(r"\"{mark}([-+0-9.eE]+)\"".format(mark=_FLOAT_MARK))


def format_number(value: float) -> str:
    return format(float(value), ".17g")


def _plain(value: Any) -> Any:
    """numpy 스칼라/배열을 JSON 으로 쓸 수 있는 값으로"""
    if isinstance(value, Mapping):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(item) for item in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return _FLOAT_MARK + format_number(value) if math.isfinite(value) else None
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_number(value)
    return str(value)


def to_json(record: Mapping[str, Any]) -> str:
    """JSON 한 건 (실수는 CSV 와 같은 '.17g' 표기)"""
    text = json.dumps(_plain(record), ensure_ascii=False, indent=2)
    return _MARKED_FLOAT.sub(r"\1", text)


def to_csv(rows: Sequence[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> str:
    """헤더 한 줄 + 행"""
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), extrasaction='ignore', lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: _cell(row.get(key)) for key in columns})
    return buffer.getvalue()


def emit(
    record: Mapping[str, Any],
    fmt: str,
    stream: TextIO,
    rows_key: Optional[str] = None,
):
    """
    결과 한 건을 출력

    Args:
        record: 출력할 결과
        fmt: "json" 또는 "csv"
        stream: 출력 스트림 (데이터 전용)
        rows_key: CSV 에서 표로 펼칠 키 (없으면 record 자체가 한 행)
    """
    if fmt == "json":
        stream.write(to_json(record) + "\n")
    elif fmt == "csv":
        if rows_key is not None:
            stream.write(to_csv(record[rows_key]))
        else:
            scalars = {key: value for key, value in record.items() if not isinstance(value, (list, tuple, dict))}
            stream.write(to_csv([scalars]))
    else:
        raise ConfigError(f"알 수 없는 출력 형식: {fmt}")
    stream.flush()


def path_rows(paths: np.ndarray, time_grid: np.ndarray) -> Iterable[Dict[str, Any]]:
    """(sample, path, time) 배열을 긴 형식 행으로"""
    for sample in range(paths.shape[0]):
        for path in range(paths.shape[1]):
            for k, time in enumerate(time_grid):
                yield {"sample": sample, "path": path + 1, "time": time, "value": paths[sample, path, k]}


def write_paths_csv(path: str, paths: np.ndarray, time_grid: np.ndarray) -> Path:
    """경로 덤프 (열: sample, path, time, value)"""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, 'w', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=list(PATH_COLUMNS), lineterminator="\n")
        writer.writeheader()
        for row in path_rows(paths, time_grid):
            writer.writerow({key: _cell(value) for key, value in row.items()})
    logger.info(f"경로 저장 완료: {target} ({paths.shape[0]}개 샘플)")
    return target

