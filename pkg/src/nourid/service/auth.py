"""Accounts and sessions with scrypt password hashing.

Authentication failures always raise the same InvalidCredentials, so an
attacker cannot tell an unknown email from a wrong password.
"""

from __future__ import annotations

import hashlib
import re
import secrets
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from ..errors import (
    DuplicateEmail,
    InvalidCredentials,
    InvalidEmail,
    NotFound,
    WeakPassword,
)

EMAIL_PATTERN = re.compile(r"^[^@\s]+@[^@\s]+\.[^@\s]+$")
MIN_PASSWORD_LENGTH = 10


@dataclass(frozen=True)
class Account:
    account_id: str
    full_name: str
    email: str
    phone: str
    password_hash: str
    role: str  # citizen | officer
    created_at: str

    def to_dict(self) -> dict:
        return {
            "account_id": self.account_id,
            "full_name": self.full_name,
            "email": self.email,
            "phone": self.phone,
            "password_hash": self.password_hash,
            "role": self.role,
            "created_at": self.created_at,
        }


@dataclass(frozen=True)
class Session:
    token: str
    account_id: str
    expires_at: str

    def to_dict(self) -> dict:
        return {
            "token": self.token,
            "account_id": self.account_id,
            "expires_at": self.expires_at,
        }


def hash_password(password: str, n: int = 2**14, r: int = 8, p: int = 1) -> str:
    salt = secrets.token_bytes(16)
    digest = hashlib.scrypt(password.encode("utf-8"), salt=salt, n=n, r=r, p=p, maxmem=64 * 2**20)
    return f"scrypt${n}${r}${p}${salt.hex()}${digest.hex()}"


def verify_password(password: str, stored: str) -> bool:
    try:
        scheme, n, r, p, salt_hex, digest_hex = stored.split("$")
        if scheme != "scrypt":
            return False
        digest = hashlib.scrypt(
            password.encode("utf-8"),
            salt=bytes.fromhex(salt_hex),
            n=int(n), r=int(r), p=int(p),
            maxmem=64 * 2**20,
        )
        return secrets.compare_digest(digest.hex(), digest_hex)
    except (ValueError, TypeError):
        return False


def _now() -> datetime:
    return datetime.now(timezone.utc)


class AccountStore:
    def __init__(self, journal=None, scrypt_params=(2**14, 8, 1)):
        self._by_email: dict[str, Account] = {}
        self._by_id: dict[str, Account] = {}
        self._lock = threading.Lock()
        self._journal = journal
        self._scrypt = scrypt_params

    def register(self, full_name: str, email: str, phone: str, password: str,
                 role: str = "citizen") -> Account:
        email = email.strip().lower()
        if not EMAIL_PATTERN.match(email):
            raise InvalidEmail(f"email {email!r} is not valid")
        if len(password) < MIN_PASSWORD_LENGTH:
            raise WeakPassword(f"password must be >= {MIN_PASSWORD_LENGTH} characters")
        n, r, p = self._scrypt
        account = Account(
            account_id=secrets.token_hex(16),
            full_name=full_name,
            email=email,
            phone=phone,
            password_hash=hash_password(password, n, r, p),
            role=role,
            created_at=_now().isoformat(),
        )
        with self._lock:
            if email in self._by_email:
                raise DuplicateEmail(f"an account already exists for {email}")
            self._by_email[email] = account
            self._by_id[account.account_id] = account
        if self._journal is not None:
            self._journal(account.to_dict())
        return account

    def authenticate(self, email: str, password: str) -> Account:
        account = self._by_email.get(email.strip().lower())
        # same error shape for unknown email and wrong password
        if account is None or not verify_password(password, account.password_hash):
            raise InvalidCredentials("invalid email or password")
        return account

    def get(self, account_id: str) -> Account:
        account = self._by_id.get(account_id)
        if account is None:
            raise NotFound(f"unknown account {account_id}")
        return account

    def has_email(self, email: str) -> bool:
        return email.strip().lower() in self._by_email

    def load(self, records: list[dict]):
        with self._lock:
            for raw in records:
                account = Account(**raw)
                self._by_email[account.email] = account
                self._by_id[account.account_id] = account


class SessionStore:
    def __init__(self, ttl_seconds: int = 3600, journal=None, clock=_now):
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        self._ttl = ttl_seconds
        self._journal = journal
        self._clock = clock

    def create(self, account_id: str) -> Session:
        session = Session(
            token=secrets.token_urlsafe(32),
            account_id=account_id,
            expires_at=(self._clock() + timedelta(seconds=self._ttl)).isoformat(),
        )
        with self._lock:
            self._sessions[session.token] = session
        if self._journal is not None:
            self._journal(session.to_dict())
        return session

    def resolve(self, token: str) -> str:
        """account_id for a live token; InvalidCredentials otherwise."""
        with self._lock:
            session = self._sessions.get(token)
        if session is None:
            raise InvalidCredentials("unknown session token")
        if datetime.fromisoformat(session.expires_at) <= self._clock():
            raise InvalidCredentials("session expired")
        return session.account_id

    def load(self, records: list[dict]):
        with self._lock:
            for raw in records:
                session = Session(**raw)
                self._sessions[session.token] = session
