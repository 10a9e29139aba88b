"""Semantic color themes: roles, light/dark modes, kt-prefixed names, contrast rules.

A theme maps semantic roles (bg, title, border, titlebox, and text in dark
mode) to colors, per mode. Color names follow the framework convention
``kt<theme>-<role>`` with a ``-dark`` suffix for dark mode.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum

from .diagnostics import Diagnostic, ValidationFailedError, error


class Mode(str, Enum):
    LIGHT = "light"
    DARK = "dark"


class Role(str, Enum):
    BG = "bg"
    TITLE = "title"
    BORDER = "border"
    TITLEBOX = "titlebox"
    TEXT = "text"


# Emission / completeness order. `text` exists only in dark mode.
LIGHT_ROLES = (Role.BG, Role.TITLE, Role.BORDER, Role.TITLEBOX)
DARK_ROLES = (Role.BG, Role.TITLE, Role.BORDER, Role.TITLEBOX, Role.TEXT)
ROLE_ORDER = DARK_ROLES

THEME_NAME_RE = re.compile(r"^[a-z]+$")
COLOR_NAME_RE = re.compile(r"^kt([a-z]+)-(bg|title|border|titlebox|text)(-dark)?$")
_HEX_RE = re.compile(r"^[0-9a-fA-F]{6}$")

# Contrast floors (WCAG AA for normal text, relaxed for the all-white theme).
TITLE_CONTRAST_FLOOR = 4.5
WHITE_TITLE_CONTRAST_FLOOR = 3.0
TEXT_CONTRAST_FLOOR = 4.5


class UnknownThemeError(KeyError):
    def __init__(self, theme: str):
        super().__init__(theme)
        self.theme = theme

    def __str__(self) -> str:
        return f"unknown theme {self.theme!r}"


class RoleUnavailableError(LookupError):
    def __init__(self, theme: str, role: Role, mode: Mode, reason: str):
        super().__init__(f"{theme}/{role.value}/{mode.value}: {reason}")
        self.theme = theme
        self.role = role
        self.mode = mode


@dataclass(frozen=True)
class ColorValue:
    """An sRGB color; canonical textual form is six uppercase hex digits."""

    red: int
    green: int
    blue: int

    def __post_init__(self):
        for chan in (self.red, self.green, self.blue):
            if not 0 <= chan <= 255:
                raise ValueError(f"channel out of range: {chan}")

    @classmethod
    def from_hex(cls, text: str) -> "ColorValue":
        value = text.lstrip("#")
        if not _HEX_RE.match(value):
            raise ValueError(f"not a 6-digit hex color: {text!r}")
        return cls(int(value[0:2], 16), int(value[2:4], 16), int(value[4:6], 16))

    @property
    def hex(self) -> str:
        return f"{self.red:02X}{self.green:02X}{self.blue:02X}"


def relative_luminance(color: ColorValue) -> float:
    """WCAG 2.x relative luminance of an sRGB color."""

    def linearize(channel: int) -> float:
        c = channel / 255.0
        return c / 12.92 if c <= 0.03928 else ((c + 0.055) / 1.055) ** 2.4

    r = linearize(color.red)
    g = linearize(color.green)
    b = linearize(color.blue)
    return 0.2126 * r + 0.7152 * g + 0.0722 * b


def contrast_ratio(a: ColorValue, b: ColorValue) -> float:
    """WCAG contrast ratio, symmetric, in [1, 21]."""
    la, lb = relative_luminance(a), relative_luminance(b)
    lighter, darker = max(la, lb), min(la, lb)
    return (lighter + 0.05) / (darker + 0.05)


@dataclass(frozen=True)
class Theme:
    """A named family of role->color assignments, per mode."""

    name: str
    light: dict[Role, ColorValue] | None = None
    dark: dict[Role, ColorValue] | None = None

    def colors(self, mode: Mode) -> dict[Role, ColorValue] | None:
        return self.light if mode is Mode.LIGHT else self.dark


@dataclass(frozen=True)
class PaletteRegistry:
    """Ordered, immutable collection of themes. Order drives emission."""

    themes: dict[str, Theme]

    def __contains__(self, name: str) -> bool:
        return name in self.themes

    def theme(self, name: str) -> Theme:
        try:
            return self.themes[name]
        except KeyError:
            raise UnknownThemeError(name) from None

    def names(self) -> tuple[str, ...]:
        return tuple(self.themes)


def color_name(theme: str, role: Role, mode: Mode) -> str:
    """`kt<theme>-<role>`, plus `-dark` in dark mode."""
    if not THEME_NAME_RE.match(theme):
        raise ValueError(f"bad theme name: {theme!r}")
    suffix = "-dark" if mode is Mode.DARK else ""
    return f"kt{theme}-{role.value}{suffix}"


def split_color_name(name: str) -> tuple[str, Role, Mode]:
    """Inverse of color_name; raises ValueError on names outside the convention."""
    m = COLOR_NAME_RE.match(name)
    if not m:
        raise ValueError(f"not a kt color name: {name!r}")
    theme, role, dark = m.groups()
    return theme, Role(role), Mode.DARK if dark else Mode.LIGHT


def resolve(registry: PaletteRegistry, theme: str, role: Role, mode: Mode) -> ColorValue:
    """Look up the stored color for (theme, role, mode)."""
    t = registry.theme(theme)
    colors = t.colors(mode)
    if colors is None:
        raise RoleUnavailableError(theme, role, mode, f"theme has no {mode.value} colors")
    if role not in colors:
        raise RoleUnavailableError(theme, role, mode, f"role {role.value} not defined in {mode.value} mode")
    return colors[role]


def resolve_name(registry: PaletteRegistry, name: str) -> ColorValue:
    """Resolve a `kt...` color name against the registry."""
    theme, role, mode = split_color_name(name)
    return resolve(registry, theme, role, mode)


# Builtin palette. The red light background and the blue dark background are
# fixed anchors; every other value is a curated choice that satisfies the
# contrast floors and keeps borders darker than backgrounds.
_BUILTIN_LIGHT = {
    # theme: (bg, title, border, titlebox)
    "gray": ("FAFAFA", "212121", "BDBDBD", "EEEEEE"),
    "blue": ("E3F2FD", "0D47A1", "BBDEFB", "90CAF9"),
    "green": ("E8F5E9", "1B5E20", "C8E6C9", "A5D6A7"),
    "yellow": ("FFFDE7", "6D4C00", "FFF9C4", "FFF59D"),
    "orange": ("FFF3E0", "B33E00", "FFE0B2", "FFCC80"),
    "red": ("FFEBEE", "B71C1C", "FFCDD2", "EF9A9A"),
    "cyan": ("E0F7FA", "006064", "B2EBF2", "80DEEA"),
    "purple": ("F3E5F5", "4A148C", "E1BEE7", "CE93D8"),
    "magenta": ("FCE4EC", "880E4F", "F8BBD0", "F48FB1"),
    "white": ("FFFFFF", "37474F", "F0F0F0", "F7F7F7"),
}

_BUILTIN_DARK = {
    # theme: (bg, title, border, titlebox, text)
    "gray": ("23272B", "CFD8DC", "1A1D20", "33383D", "ECEFF1"),
    "blue": ("1F2A36", "90CAF9", "161E27", "2C3B4C", "E3F2FD"),
    "green": ("1E2B22", "A5D6A7", "151F18", "2B3D30", "E8F5E9"),
    "yellow": ("2B2A1A", "FFF59D", "1F1E12", "3C3B26", "FFFDE7"),
    "orange": ("2E2418", "FFCC80", "211A11", "403324", "FFF3E0"),
    "red": ("2E1D20", "EF9A9A", "211517", "402A2E", "FFEBEE"),
}


def builtin_registry() -> PaletteRegistry:
    """The builtin themes: six dual-mode, four light-only. Deterministic."""
    themes: dict[str, Theme] = {}
    for name, light_hexes in _BUILTIN_LIGHT.items():
        light = {role: ColorValue.from_hex(h) for role, h in zip(LIGHT_ROLES, light_hexes)}
        dark = None
        if name in _BUILTIN_DARK:
            dark = {role: ColorValue.from_hex(h) for role, h in zip(DARK_ROLES, _BUILTIN_DARK[name])}
        themes[name] = Theme(name=name, light=light, dark=dark)
    return PaletteRegistry(themes=themes)


def _check_mode_set(theme: Theme, mode: Mode, diags: list[Diagnostic], path: str) -> None:
    colors = theme.colors(mode)
    if colors is None:
        return
    expected = LIGHT_ROLES if mode is Mode.LIGHT else DARK_ROLES
    for role in expected:
        if role not in colors:
            diags.append(error(
                "palette-missing-role", f"{path}.{mode.value}",
                f"theme {theme.name!r} {mode.value} set lacks role {role.value!r}"))
    for role in colors:
        if role not in expected:
            diags.append(error(
                "palette-extra-role", f"{path}.{mode.value}",
                f"theme {theme.name!r} {mode.value} set has stray role {role.value!r}"))
    if any(role not in colors for role in expected):
        return

    bg = colors[Role.BG]
    floor = WHITE_TITLE_CONTRAST_FLOOR if theme.name == "white" else TITLE_CONTRAST_FLOOR
    ratio = contrast_ratio(colors[Role.TITLE], bg)
    if ratio < floor:
        diags.append(error(
            "palette-low-contrast", f"{path}.{mode.value}.title",
            f"theme {theme.name!r} {mode.value} title/bg contrast {ratio:.2f} below {floor}"))
    if mode is Mode.DARK:
        ratio = contrast_ratio(colors[Role.TEXT], bg)
        if ratio < TEXT_CONTRAST_FLOOR:
            diags.append(error(
                "palette-low-contrast", f"{path}.{mode.value}.text",
                f"theme {theme.name!r} dark text/bg contrast {ratio:.2f} below {TEXT_CONTRAST_FLOOR}"))
    if relative_luminance(colors[Role.BORDER]) >= relative_luminance(bg):
        diags.append(error(
            "palette-border-not-darker", f"{path}.{mode.value}.border",
            f"theme {theme.name!r} {mode.value} border must be darker than its background"))


def validate_registry(registry: PaletteRegistry) -> list[Diagnostic]:
    """Empty iff all naming, completeness, contrast, and border rules hold."""
    diags: list[Diagnostic] = []
    for name, theme in registry.themes.items():
        path = f"palette.{name}"
        if not THEME_NAME_RE.match(name):
            diags.append(error("palette-bad-theme-name", path, f"theme name {name!r} must match [a-z]+"))
        if theme.light is None and theme.dark is None:
            diags.append(error("palette-empty-theme", path, f"theme {name!r} defines no colors"))
            continue
        _check_mode_set(theme, Mode.LIGHT, diags, path)
        _check_mode_set(theme, Mode.DARK, diags, path)
    return diags


def emit_palette_definitions(registry: PaletteRegistry) -> str:
    """One `\\definecolor{<name>}{HTML}{<hex>}` line per (theme, mode, role).

    Ordered by theme registration, then mode (light first), then role.
    """
    diags = validate_registry(registry)
    if diags:
        raise ValidationFailedError(diags)
    lines = []
    for name, theme in registry.themes.items():
        for mode in (Mode.LIGHT, Mode.DARK):
            colors = theme.colors(mode)
            if colors is None:
                continue
            roles = LIGHT_ROLES if mode is Mode.LIGHT else DARK_ROLES
            for role in roles:
                lines.append(
                    f"\\definecolor{{{color_name(name, role, mode)}}}{{HTML}}{{{colors[role].hex}}}")
    return "\n".join(lines) + "\n" if lines else ""


def registry_to_json(registry: PaletteRegistry) -> str:
    """JSON export: theme name -> {"light": {role: hex}, "dark": {...}}."""
    out: dict[str, dict[str, dict[str, str]]] = {}
    for name, theme in registry.themes.items():
        entry: dict[str, dict[str, str]] = {}
        for mode in (Mode.LIGHT, Mode.DARK):
            colors = theme.colors(mode)
            if colors is None:
                continue
            roles = LIGHT_ROLES if mode is Mode.LIGHT else DARK_ROLES
            entry[mode.value] = {role.value: colors[role].hex for role in roles}
        out[name] = entry
    return json.dumps(out, indent=2) + "\n"


def apply_overrides(
    registry: PaletteRegistry,
    overrides: dict[str, dict[str, dict[str, str]]],
) -> PaletteRegistry:
    """Overlay a palette patch: partial role overrides for known themes,
    whole new themes otherwise. Hex strings are parsed here; semantic rules
    are left to validate_registry.
    """
    themes = {name: Theme(t.name, dict(t.light) if t.light else None, dict(t.dark) if t.dark else None)
              for name, t in registry.themes.items()}
    for name, modes in overrides.items():
        base = themes.get(name)
        light = dict(base.light) if base and base.light else {}
        dark = dict(base.dark) if base and base.dark else {}
        for mode_key, roles in modes.items():
            target = light if mode_key == Mode.LIGHT.value else dark
            for role_key, hex_value in roles.items():
                target[Role(role_key)] = ColorValue.from_hex(hex_value)
        themes[name] = Theme(name=name, light=light or None, dark=dark or None)
    return PaletteRegistry(themes=themes)
