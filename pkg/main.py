"""
Grad Halfspace v1.0 - Punto d'ingresso

Esempi:
    python main.py analyze --system kramers3:nu=1
    python main.py check-bc --system full3d:M=5 --bc grad:chi=1
    python main.py demo kramers3

Autore: Grad Halfspace Team
Versione: 1.0.0
"""

from grad_halfspace.cli import main

if __name__ == "__main__":
    raise SystemExit(main())
