from fastapi import APIRouter

from app.api.routes.selection import commands

router = APIRouter(prefix="/selection", tags=["selection"])
router.include_router(commands.router)
