"""Numerical experiments for the estimates: kernels, Strichartz, trilinear, summability."""
