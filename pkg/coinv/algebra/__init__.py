"""Exact algebra: finite abelian groups, group rings, integer linear algebra"""
