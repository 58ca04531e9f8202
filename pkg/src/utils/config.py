"""
툴킷 설정

우선순위: CLI 플래그 > 환경 변수 > --config 파일 > 기본값.
설정 파일은 YAML 매핑이며, `key=value` 형식의 줄도 같은 매핑으로 읽습니다.
"""
import logging
import os
from dataclasses import dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

import yaml

from ..errors import ConfigError
from ..kernel.finite import ContourPolicy, FiniteSettings
from ..kernel.tacnode import KernelSettings

logger = logging.getLogger(__name__)

MODULE = "cli"

ENV_KEYS = {
    "TACNODE_THREADS": "threads",
    "TACNODE_QUAD_ORDER": "quad_order",
    "TACNODE_CUTOFF": "cutoff",
    "TACNODE_LOG_FILE": "log_file",
}
OUTPUT_FORMATS = ("json", "csv")


@dataclass(frozen=True)
class ToolkitConfig:
    """툴킷 설정"""
    threads: int = 1
    quad_order: int = 140
    cutoff: float = 40.0
    mu_order: int = 120
    airy_cutoff: float = 40.0
    nystrom_order: int = 100
    circle_order: int = 256
    line_order: int = 400
    contour_policy: str = "saddle"
    gap_order: int = 40
    log_file: Optional[str] = None
    output_format: str = "json"

    def __post_init__(self):
        for name in ("threads", "quad_order", "mu_order", "nystrom_order", "circle_order", "line_order", "gap_order"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} 는 1 이상이어야 합니다: {getattr(self, name)}", MODULE)
        for name in ("cutoff", "airy_cutoff"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} 는 양수여야 합니다: {getattr(self, name)}", MODULE)
        if self.contour_policy not in {policy.value for policy in ContourPolicy}:
            raise ConfigError(f"알 수 없는 contour_policy: {self.contour_policy}", MODULE)
        if self.output_format not in OUTPUT_FORMATS:
            raise ConfigError(f"output_format 은 {OUTPUT_FORMATS} 중 하나여야 합니다: {self.output_format}", MODULE)

    def kernel_settings(self) -> KernelSettings:
        return KernelSettings(
            quad_order=self.quad_order,
            cutoff=self.cutoff,
            mu_order=self.mu_order,
            mu_cutoff=self.airy_cutoff,
        )

    def finite_settings(self) -> FiniteSettings:
        return FiniteSettings(
            nystrom_order=self.nystrom_order,
            circle_order=self.circle_order,
            line_order=self.line_order,
            policy=ContourPolicy(self.contour_policy),
        )

    def merged(self, overrides: Mapping[str, Any]) -> "ToolkitConfig":
        """None 이 아닌 값만 덮어쓴 새 설정"""
        values = coerce_values({key: value for key, value in overrides.items() if value is not None})
        return replace(self, **values)


_FIELD_TYPES = {field.name: field.type for field in fields(ToolkitConfig)}


def _coerce(key: str, value: Any) -> Any:
    kind = _FIELD_TYPES[key]
    if value is None:
        if key == "log_file":
            return None
        raise ConfigError(f"{key} 값이 비어 있습니다", MODULE)
    try:
        if kind is int:
            if isinstance(value, bool) or (isinstance(value, float) and not value.is_integer()):
                raise ValueError(value)
            return int(value)
        if kind is float:
            if isinstance(value, bool):
                raise ValueError(value)
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{key} 의 형식이 잘못되었습니다: {value!r}", MODULE) from None
    if not isinstance(value, str):
        raise ConfigError(f"{key} 는 문자열이어야 합니다: {value!r}", MODULE)
    return value


def coerce_values(raw: Mapping[str, Any]) -> Dict[str, Any]:
    """알 수 없는 키나 잘못된 형식은 ConfigError"""
    unknown = sorted(set(raw) - set(_FIELD_TYPES))
    if unknown:
        raise ConfigError(f"알 수 없는 설정 키: {', '.join(unknown)}", MODULE)
    return {key: _coerce(key, value) for key, value in raw.items()}


def _parse_key_value_lines(text: str) -> Dict[str, Any]:
    """`key=value` 줄을 YAML 스칼라 규칙으로 읽음"""
    result: Dict[str, Any] = {}
    for number, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{number}번째 줄을 해석할 수 없습니다: {line!r}", MODULE)
        key, value = (part.strip() for part in stripped.split("=", 1))
        result[key] = yaml.safe_load(value) if value else None
    return result


def load_config_file(path: str) -> Dict[str, Any]:
    """설정 파일 읽기 (YAML 매핑 또는 key=value 줄)"""
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"설정 파일이 없습니다: {config_path}", MODULE)
    with open(config_path, 'r', encoding='utf-8') as f:
        text = f.read()

    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError:
        data = None
    if data is None and text.strip():
        data = _parse_key_value_lines(text)
    elif isinstance(data, str) or (data is not None and not isinstance(data, dict)):
        data = _parse_key_value_lines(text)
    data = data or {}
    logger.debug(f"설정 파일 로드: {config_path} ({len(data)}개 키)")
    return coerce_values(data)


def env_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    """TACNODE_* 환경 변수"""
    environ = os.environ if environ is None else environ
    raw = {field: environ[name] for name, field in ENV_KEYS.items() if environ.get(name)}
    return coerce_values(raw)


def resolve_config(
    cli_overrides: Optional[Mapping[str, Any]] = None,
    config_path: Optional[str] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> ToolkitConfig:
    """기본값 ← 설정 파일 ← 환경 변수 ← CLI 플래그 순으로 병합"""
    config = ToolkitConfig()
    if config_path:
        config = config.merged(load_config_file(config_path))
    config = config.merged(env_overrides(environ))
    if cli_overrides:
        config = config.merged(cli_overrides)
    return config
