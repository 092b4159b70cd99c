"""工具模块"""

__all__ = []
