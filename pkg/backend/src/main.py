# backend/src/main.py
"""
Servidor stub de decisão (chat-completions) do Market Insight Sim.
"""
import os
import sys

import uvicorn
from dotenv import load_dotenv
from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from loguru import logger

# Adicionar o diretório backend ao sys.path para resolver importações "src."
backend_dir = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if backend_dir not in sys.path:
    sys.path.insert(0, backend_dir)

dotenv_path = os.path.join(backend_dir, ".env")
if os.path.exists(dotenv_path):
    load_dotenv(dotenv_path, encoding="utf-8")
    logger.info("Variáveis de ambiente carregadas com sucesso")

from src.utils.config import get_settings
from src.utils.logger import setup_logging

settings = get_settings()

app = FastAPI(
    title="Market Insight Sim - Stub de Decisão",
    description="Endpoint chat-completions roteirizado para executar agentes FCL sem um LLM real",
    version="0.1.0",
)

from src.api.middlewares.error_handler import error_handler_middleware
app.middleware("http")(error_handler_middleware)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_methods=["*"],
    allow_headers=["*"],
)


@app.get("/")
async def root():
    return {
        "message": "Stub de decisão do Market Insight Sim. Acesse /docs para a documentação.",
        "status": "online",
        "version": app.version,
    }


@app.get("/api/status")
async def status():
    from src.api.dependencies import get_stub_replier
    return {
        "status": "online",
        "version": app.version,
        "reply_mode": get_stub_replier().mode,
        "environment": settings.ENVIRONMENT,
    }


from src.api.routes import chat_completions
app.include_router(chat_completions.router, prefix="/v1", tags=["Chat Completions"])

if __name__ == "__main__":
    setup_logging(settings.LOG_LEVEL, settings.LOGS_DIR)
    uvicorn.run(
        "src.main:app",
        host=settings.API_HOST,
        port=settings.API_PORT,
        reload=False,
        workers=None,
        loop="asyncio",
    )
