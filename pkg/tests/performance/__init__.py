"""性能测试模块"""
