# driftsel 核心模块
