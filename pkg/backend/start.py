#!/usr/bin/env python
"""
Script para iniciar o servidor stub de decisão do Market Insight Sim.
"""
import os
import signal
import sys

from colorama import Fore, Style, init
from dotenv import load_dotenv

init()

VALID_MODES = ("buy", "sell", "alternate", "prose")


def check_env():
    """Carrega o .env, se existir, e valida o modo de resposta do stub."""
    dotenv_path = os.path.join(os.path.dirname(os.path.abspath(__file__)), ".env")

    if not os.path.exists(dotenv_path):
        print(f"{Fore.YELLOW}⚠️ Arquivo .env não encontrado - usando valores padrão.{Style.RESET_ALL}")
        print(f"Para personalizar, copie {Fore.YELLOW}.env.example{Style.RESET_ALL} para .env")
    else:
        try:
            load_dotenv(dotenv_path, encoding="utf-8")
        except Exception as e:
            print(f"{Fore.RED}❌ Erro ao carregar arquivo .env: {str(e)}{Style.RESET_ALL}")
            return False

    mode = os.getenv("STUB_REPLY_MODE", "alternate")
    if mode not in VALID_MODES:
        print(f"{Fore.RED}❌ STUB_REPLY_MODE inválido: {mode} (use {', '.join(VALID_MODES)}){Style.RESET_ALL}")
        return False
    return True


def setup_env():
    """Cria os diretórios de logs e de saída."""
    base_dir = os.path.dirname(os.path.abspath(__file__))
    for dir_name in (os.getenv("LOGS_DIR", "logs"), os.getenv("OUTPUT_DIR", "output")):
        if not dir_name:
            continue
        dir_path = os.path.join(base_dir, dir_name)
        if not os.path.exists(dir_path):
            os.makedirs(dir_path)
            print(f"{Fore.GREEN}✓ Diretório criado: {dir_name}{Style.RESET_ALL}")
    os.environ["PYTHONUNBUFFERED"] = "1"


def start_server():
    """Inicia o servidor FastAPI usando Uvicorn."""
    current_dir = os.path.dirname(os.path.abspath(__file__))
    sys.path.insert(0, current_dir)

    host = os.getenv("API_HOST", "0.0.0.0")
    port = int(os.getenv("API_PORT", 8000))
    mode = os.getenv("STUB_REPLY_MODE", "alternate")

    print(f"\n{Fore.CYAN}🚀 Iniciando stub de decisão...{Style.RESET_ALL}")
    print(f"   Endpoint: {Fore.GREEN}http://{host}:{port}/v1/chat/completions{Style.RESET_ALL}")
    print(f"   Documentação: {Fore.GREEN}http://{host}:{port}/docs{Style.RESET_ALL}")
    print(f"   Modo de resposta: {Fore.GREEN}{mode}{Style.RESET_ALL}")

    try:
        cmd = [
            sys.executable,
            "-m",
            "uvicorn",
            "src.main:app",
            "--host", host,
            "--port", str(port),
            "--workers", "1",
        ]

        def signal_handler(sig, frame):
            print(f"\n{Fore.YELLOW}⚠️ Encerrando servidor...{Style.RESET_ALL}")
            sys.exit(0)

        signal.signal(signal.SIGINT, signal_handler)
        os.execvp(cmd[0], cmd)

    except Exception as e:
        print(f"{Fore.RED}❌ Erro ao iniciar o servidor: {str(e)}{Style.RESET_ALL}")
        sys.exit(1)


if __name__ == "__main__":
    if not check_env():
        sys.exit(1)
    setup_env()
    start_server()
