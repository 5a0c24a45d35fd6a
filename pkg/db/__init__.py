# Verification report archive
