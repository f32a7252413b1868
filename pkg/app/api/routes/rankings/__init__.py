from fastapi import APIRouter

from app.api.routes.rankings import commands

router = APIRouter(prefix="/rankings", tags=["rankings"])
router.include_router(commands.router)
