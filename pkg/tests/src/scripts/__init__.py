"""Interactive helper scripts for qmoduli"""
