"""集成测试模块"""

__all__ = []
