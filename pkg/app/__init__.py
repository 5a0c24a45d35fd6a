# Pricing application package
