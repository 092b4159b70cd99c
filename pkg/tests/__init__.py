"""测试模块"""

__all__ = []
