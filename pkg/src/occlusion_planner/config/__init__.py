"""配置模块"""

from occlusion_planner.config.settings import Settings, settings

__all__ = [
    "Settings",
    "settings",
]
