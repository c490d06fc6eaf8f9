# -*- coding:utf-8 -*-


class GlobalSetting:
    """全局设置

    Process wide numerical defaults.  Nothing here is read from the
    environment: every run is fully described by its config document.
    """

    """概率截断 Probability clamp applied before logarithms"""
    PROB_EPS = 1e-12

    """报告小数位数"""
    REPORT_DECIMALS = 4

    """中心差分步长"""
    FD_STEP = 1e-6

    """梯度检查相对误差的分母下限"""
    GRAD_CHECK_FLOOR = 1e-3

    @classmethod
    def get_prob_eps(cls) -> float:
        return cls.PROB_EPS

    @classmethod
    def get_report_decimals(cls) -> int:
        return cls.REPORT_DECIMALS

    @classmethod
    def get_fd_step(cls) -> float:
        return cls.FD_STEP

    @classmethod
    def get_grad_check_floor(cls) -> float:
        return cls.GRAD_CHECK_FLOOR
