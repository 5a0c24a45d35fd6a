# Verification harness package
