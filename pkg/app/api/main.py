from fastapi import APIRouter

from app.api.routes import utils
from app.api.routes.rankings import router as rankings_router
from app.api.routes.selection import router as selection_router

api_router = APIRouter()
api_router.include_router(utils.router)
api_router.include_router(rankings_router)
api_router.include_router(selection_router)
