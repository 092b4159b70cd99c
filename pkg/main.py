"""
Occlusion Planner 入口文件

提供命令行启动入口，等价于 occlusion-planner 命令。
"""

from occlusion_planner.cli import main as cli
from occlusion_planner.config.settings import settings
from occlusion_planner.utils.logger import get_logger, setup_logging

setup_logging()
logger = get_logger(__name__)


def main() -> None:
    """
    启动命令行
    """
    logger.info(f"启动 {settings.app_name} v{settings.app_version}")
    cli()


if __name__ == "__main__":
    main()
