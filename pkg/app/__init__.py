# Archivo __init__.py
