"""User, plant, and channel records over the document store, with the
in-memory indexes the request path needs (token and write-key lookup)."""

from __future__ import annotations

import hashlib
import secrets
import threading
import time
from typing import Optional

from .model import (
    NICKNAME_MAX_LEN,
    Calibration,
    Plant,
    SensorChannel,
    SpeciesCatalog,
    User,
)
from .store import TelemetryStore

TOKEN_LEN = 32
API_KEY_LEN = 16


class RegistryError(Exception):
    pass


class NotFoundError(RegistryError):
    pass


class ConflictError(RegistryError):
    pass


def hash_token(token: str) -> str:
    return hashlib.sha256(token.encode("utf-8")).hexdigest()


class Registry:
    def __init__(self, store: TelemetryStore, catalog: SpeciesCatalog):
        self._store = store
        self._catalog = catalog
        self._lock = threading.Lock()
        self._token_index: dict[str, str] = {}  # token_hash -> user_id
        self._login_index: dict[str, str] = {}  # login_name -> user_id
        self._key_index: dict[str, str] = {}  # write_api_key -> channel_id
        self._plant_channel: dict[str, str] = {}  # plant_id -> channel_id
        for doc in store.list_docs("users"):
            user = User.from_doc(doc)
            self._token_index[user.token_hash] = user.user_id
            self._login_index[user.login_name] = user.user_id
        for doc in store.list_docs("channels"):
            channel = SensorChannel.from_doc(doc)
            self._key_index[channel.write_api_key] = channel.channel_id
            self._plant_channel[channel.plant_id] = channel.channel_id

    # -- users -------------------------------------------------------------

    def create_user(self, login_name: str) -> tuple:
        """Register a user; returns (User, bearer token). The token is only
        ever returned here, the store keeps its digest."""
        login_name = login_name.strip()
        if not login_name:
            raise ValueError("login_name must be non-empty")
        with self._lock:
            if login_name in self._login_index:
                raise ConflictError(f"login name {login_name!r} is taken")
            token = secrets.token_hex(TOKEN_LEN // 2)
            user = User(
                user_id=secrets.token_hex(6),
                login_name=login_name,
                token_hash=hash_token(token),
            )
            self._store.put_doc("users", user.user_id, user.to_doc())
            self._login_index[login_name] = user.user_id
            self._token_index[user.token_hash] = user.user_id
        return user, token

    def user_by_token(self, token: str) -> Optional[User]:
        user_id = self._token_index.get(hash_token(token))
        if user_id is None:
            return None
        doc = self._store.get_doc("users", user_id)
        return User.from_doc(doc) if doc else None

    # -- plants --------------------------------------------------------------

    def create_plant(self, owner_user_id: str, species_id: str, nickname: str) -> Plant:
        nickname = nickname.strip()
        if not nickname or len(nickname) > NICKNAME_MAX_LEN:
            raise ValueError(f"nickname must be 1-{NICKNAME_MAX_LEN} characters")
        self._catalog.resolve(species_id)  # raises UnknownSpeciesError
        plant = Plant(
            plant_id=secrets.token_hex(6),
            owner_user_id=owner_user_id,
            species_id=species_id,
            nickname=nickname,
            created_at=int(time.time()),
        )
        self._store.put_doc("plants", plant.plant_id, plant.to_doc())
        return plant

    def get_plant(self, plant_id: str) -> Optional[Plant]:
        doc = self._store.get_doc("plants", plant_id)
        return Plant.from_doc(doc) if doc else None

    def list_plants(self, owner_user_id: str) -> list[Plant]:
        docs = self._store.list_docs("plants", {"owner_user_id": owner_user_id})
        return sorted((Plant.from_doc(d) for d in docs), key=lambda p: p.created_at)

    def all_plants(self) -> list[Plant]:
        return [Plant.from_doc(d) for d in self._store.list_docs("plants")]

    def delete_plant(self, plant_id: str) -> None:
        """Remove the plant along with its channel, readings, and chat session."""
        with self._lock:
            channel_id = self._plant_channel.pop(plant_id, None)
            if channel_id is not None:
                doc = self._store.get_doc("channels", channel_id)
                if doc:
                    self._key_index.pop(doc.get("write_api_key"), None)
                self._store.delete_doc("channels", channel_id)
                self._store.drop_channel(channel_id)
        self._store.delete_doc("sessions", plant_id)
        self._store.delete_doc("plants", plant_id)

    # -- channels ------------------------------------------------------------

    def create_channel(self, plant_id: str, calibration: Optional[dict] = None) -> SensorChannel:
        """Bind a sensor node to a plant; one channel per plant.

        `calibration` maps wire field names to Calibration; fields without
        an entry are expected to arrive pre-normalized.
        """
        if self.get_plant(plant_id) is None:
            raise NotFoundError(f"plant {plant_id!r} does not exist")
        with self._lock:
            if plant_id in self._plant_channel:
                raise ConflictError(f"plant {plant_id!r} already has a channel")
            write_api_key = secrets.token_hex(API_KEY_LEN // 2)
            while write_api_key in self._key_index:
                write_api_key = secrets.token_hex(API_KEY_LEN // 2)
            channel = SensorChannel(
                channel_id=secrets.token_hex(6),
                plant_id=plant_id,
                write_api_key=write_api_key,
                calibration=dict(calibration or {}),
            )
            self._store.put_doc("channels", channel.channel_id, channel.to_doc())
            self._key_index[write_api_key] = channel.channel_id
            self._plant_channel[plant_id] = channel.channel_id
        return channel

    def channel_by_key(self, api_key: str) -> Optional[SensorChannel]:
        channel_id = self._key_index.get(api_key)
        if channel_id is None:
            return None
        doc = self._store.get_doc("channels", channel_id)
        return SensorChannel.from_doc(doc) if doc else None

    def channel_for_plant(self, plant_id: str) -> Optional[SensorChannel]:
        channel_id = self._plant_channel.get(plant_id)
        if channel_id is None:
            return None
        doc = self._store.get_doc("channels", channel_id)
        return SensorChannel.from_doc(doc) if doc else None
