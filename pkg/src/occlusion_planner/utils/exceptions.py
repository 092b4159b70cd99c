"""
异常定义模块

定义项目中使用的所有自定义异常类。
"""


class OcclusionPlannerError(Exception):
    """基础异常类"""

    def __init__(self, message: str = "遮挡感知规划错误"):
        self.message = message
        super().__init__(self.message)


class DegenerateInputError(OcclusionPlannerError):
    """退化输入异常（例如凸包面积为零）"""

    def __init__(self, message: str = "输入点集退化，凸包面积为零"):
        super().__init__(message)


class DegenerateLineError(OcclusionPlannerError):
    """退化直线异常（定义直线的两点重合）"""

    def __init__(self, distance: float = 0.0):
        super().__init__(f"视线退化: 两个定义点间距 {distance:.3e} m 小于 1e-9 m")


class DegenerateGeometryError(OcclusionPlannerError):
    """退化遮挡几何异常（目标样本与障碍物中心重合）"""

    def __init__(self, message: str = "目标样本与障碍物中心重合，遮挡判据无定义"):
        super().__init__(message)


class NotPositiveDefiniteError(OcclusionPlannerError):
    """协方差矩阵非正定异常"""

    def __init__(self, message: str = "协方差矩阵必须对称正定"):
        super().__init__(message)


class OnSightLineError(OcclusionPlannerError):
    """机器人位于视线上，ξ无界"""

    def __init__(self, distance: float = 0.0):
        self.distance = distance
        super().__init__(f"机器人到视线距离 {distance:.3e} m 过小，ξ无界")


class SolverFailureError(OcclusionPlannerError):
    """凸优化求解失败异常"""

    def __init__(self, status: str = "", message: str = "凸优化子问题求解失败"):
        self.status = status
        full_message = f"{message}（状态: {status}）" if status else message
        super().__init__(full_message)


class StaleDualsError(OcclusionPlannerError):
    """对偶变量不满足可行性不变量"""

    def __init__(self, obstacle_index: int = -1, step: int = -1, message: str = ""):
        self.obstacle_index = obstacle_index
        self.step = step
        detail = f"障碍物{obstacle_index}、步{step}的对偶变量失效"
        super().__init__(f"{detail}: {message}" if message else detail)


class DegenerateTargetError(OcclusionPlannerError):
    """目标均值与机器人位置重合"""

    def __init__(self, distance: float = 0.0):
        super().__init__(f"目标均值与机器人位置距离 {distance:.3e} m 过小，无法生成参考航点")


class InfeasibleStartError(OcclusionPlannerError):
    """带松弛的轨迹子问题仍不可行"""

    def __init__(self, message: str = "带松弛变量的轨迹子问题仍不可行"):
        super().__init__(message)


class ScenarioParseError(OcclusionPlannerError):
    """场景文件解析异常"""

    def __init__(self, path: str = "", line: int | None = None, message: str = "场景文件解析失败"):
        self.path = path
        self.line = line
        location = f"{path}:{line}" if line is not None else path
        super().__init__(f"{location}: {message}" if location else message)


class InvariantViolationError(OcclusionPlannerError):
    """场景不变量校验失败"""

    def __init__(self, entity: str = "", message: str = "场景不变量校验失败", line: int | None = None):
        self.entity = entity
        self.detail = message
        self.line = line
        prefix = f"第{line}行 " if line is not None else ""
        full_message = f"{prefix}{entity}: {message}" if entity else f"{prefix}{message}"
        super().__init__(full_message)


class ConfigurationError(OcclusionPlannerError):
    """配置错误异常"""

    def __init__(self, config_name: str = "", message: str = "配置错误"):
        full_message = f"配置项'{config_name}'错误: {message}" if config_name else message
        super().__init__(full_message)


class PlotDataError(OcclusionPlannerError):
    """绘图数据写出异常"""

    def __init__(self, message: str = "绘图数据写出失败"):
        super().__init__(message)
