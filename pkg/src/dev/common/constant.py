# constant.py - 全局常量专用文件
# 1. 基础常量（全大写，区分普通变量）
PROJECT_NAME = "beamkit"
VERSION = "1.0.0"

# 2. 数值约定
NEG_INF = -1e9  # 被屏蔽 token 的对数概率哨兵值，避免 -inf 参与比较产生 NaN
NORMALIZATION_TOLERANCE = 1e-6  # 概率行归一化容差
SCORE_TOLERANCE = 1e-9  # 分数复算容差

# 3. 特殊符号默认写法
DEFAULT_BOS = "<s>"
DEFAULT_EOS = "</s>"

# 4. 解码预设（结构化，易维护）
# 最大长度 M 含 BOS，摘要预设取 max-len-b + 1
DECODER_PRESETS = {
    "mt": {
        "beam_size": 5,
        "patience": 2.0,
        "length_penalty": 1.0,
        "penalty_style": "power",
        "max_length": 201,
    },
    "xsum-style": {
        "beam_size": 6,
        "patience": 0.5,
        "length_penalty": 1.0,
        "penalty_style": "power",
        "max_length": 61,
        "min_length": 10,
        "no_repeat_ngram_size": 3,
    },
    "cnndm-style": {
        "beam_size": 4,
        "patience": 0.5,
        "length_penalty": 2.0,
        "penalty_style": "power",
        "max_length": 141,
        "min_length": 55,
        "no_repeat_ngram_size": 3,
    },
}
