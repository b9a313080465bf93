import os
from pathlib import Path
from dotenv import load_dotenv

# .env ファイルをロード
BASE_DIR = Path(__file__).resolve().parent
env_path = BASE_DIR / '.env'
load_dotenv(dotenv_path=env_path)

# ログ設定 - 環境変数から取得
LOG_LEVEL = os.getenv("LLT_LOG_LEVEL", "INFO").upper()
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

# 全探索の上限（--cap と同じ意味）
ENUM_CAP = int(os.getenv("LLT_ENUM_CAP", "8"))
BINARY_CAP = int(os.getenv("LLT_BINARY_CAP", "12"))
CROSSCHECK_CAP = int(os.getenv("LLT_CROSSCHECK_CAP", "10"))
HAMMING_SUBSET_CAP = int(os.getenv("LLT_HAMMING_SUBSET_CAP", "8"))

# 全探索のワーカー数（1 ならプロセスプールを使わない）
WORKERS = max(1, int(os.getenv("LLT_WORKERS", "1")))

# SLLT のθ既定値 (ε = θ/2)
DEFAULT_THETA = float(os.getenv("LLT_DEFAULT_THETA", "0.5"))

# 浮動小数点比較の許容誤差
TOLERANCE = float(os.getenv("LLT_TOLERANCE", "1e-9"))

# レポートの有効桁数
REPORT_DIGITS = int(os.getenv("LLT_REPORT_DIGITS", "12"))
REPORT_SCHEMA = 1

# selftest の乱数シード
DEFAULT_SEED = int(os.getenv("LLT_SEED", "0"))

# 開発モード設定
DEV_MODE = os.getenv("LLT_DEV_MODE", "False").lower() in ("true", "1", "t")
