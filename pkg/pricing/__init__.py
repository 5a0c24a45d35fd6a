# Pricing core package
