#!/usr/bin/env python
"""
Script de configuração inicial para o Market Insight Sim.
"""
import os
import subprocess
import sys


def check_python_version():
    """Verifica a versão do Python."""
    print("🔍 Verificando versão do Python...")
    required_version = (3, 10)
    current_version = sys.version_info

    if current_version < required_version:
        print(f"❌ Python {required_version[0]}.{required_version[1]} ou superior é necessário")
        print(f"   Versão atual: {current_version[0]}.{current_version[1]}")
        sys.exit(1)

    print(f"✅ Usando Python {current_version[0]}.{current_version[1]}.{current_version[2]}")


def install_dependencies():
    """Instala as dependências do projeto."""
    print("\n🔧 Instalando dependências...")

    try:
        subprocess.check_call([sys.executable, "-m", "pip", "install", "-r", "requirements.txt"])
        print("✅ Dependências instaladas com sucesso!")
    except subprocess.CalledProcessError:
        print("❌ Erro ao instalar dependências")
        sys.exit(1)


def setup_directories():
    """Cria os diretórios de saída do backend se necessário."""
    print("\n🔧 Verificando estrutura de diretórios...")

    for directory in ("backend/output", "backend/logs"):
        if not os.path.exists(directory):
            print(f"📁 Criando diretório: {directory}")
            os.makedirs(directory, exist_ok=True)

    print("✅ Estrutura de diretórios verificada!")


def show_next_steps():
    """Exibe próximos passos para o usuário."""
    print("\n🚀 Configuração inicial concluída!")
    print("\n📝 Próximos passos:")
    print("  1. (Opcional) Copie backend/.env.example para backend/.env")
    print("  2. Rode os testes:")
    print("     pytest")
    print("  3. Rode uma simulação de mesa:")
    print("     cd backend && python -m src.cli run config/desk.json --out output/desk")
    print("  4. Analise os ticks:")
    print("     python -m src.cli analyze output/desk")


def package_setup():
    """Metadados de empacotamento (usado por pip/setuptools, ex.: pip install -e .)."""
    from setuptools import find_packages, setup

    setup(
        name="market-insight-sim",
        version="0.1.0",
        python_requires=">=3.10",
        package_dir={"": "backend"},
        packages=find_packages("backend", include=["src", "src.*"]),
        install_requires=[
            "fastapi>=0.104.1",
            "uvicorn>=0.23.2",
            "pydantic>=2.4.2",
            "pydantic-settings>=2.0.3",
            "python-dotenv>=1.0.0",
            "httpx>=0.25.0",
            "tenacity>=8.2.3",
            "pandas>=2.1.1",
            "numpy>=1.26.0",
            "scipy>=1.11.0",
            "sortedcontainers>=2.4.0",
            "loguru>=0.7.2",
            "colorama>=0.4.6",
        ],
    )


if __name__ == "__main__" and len(sys.argv) > 1:
    # Invocado por setuptools/pip com um comando (egg_info, bdist_wheel, ...)
    package_setup()
elif __name__ == "__main__":
    print("🚀 Iniciando configuração do Market Insight Sim...")

    check_python_version()
    install_dependencies()
    setup_directories()
    show_next_steps()
