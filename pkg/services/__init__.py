# Services package for qiup-sim
