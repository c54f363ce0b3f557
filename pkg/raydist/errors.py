"""
Errors Module
Các lớp lỗi dùng chung trong package và mã thoát (exit code) tương ứng cho CLI
"""


EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4


class RayDistError(Exception):
    """Lỗi gốc của package"""

    exit_code = EXIT_DATA


class DataError(RayDistError, ValueError):
    """Dữ liệu đầu vào không hợp lệ (mesh, file, tham số)"""

    exit_code = EXIT_DATA


class ObjParseError(DataError):
    """Lỗi khi đọc file OBJ, kèm số dòng"""

    def __init__(self, path, line_number: int, reason: str):
        self.path = str(path)
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"{self.path}:{line_number}: {reason}")


class NumericError(RayDistError, ArithmeticError):
    """Lỗi tính toán số (ví dụ mất điểm cắt 0)"""

    exit_code = EXIT_NUMERIC
