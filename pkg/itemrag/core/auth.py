"""Credential resolution for the LLM endpoint."""

import os
from typing import List, Optional, Union

from pydantic import SecretStr

from .exceptions import AuthenticationError

API_KEY_ENV = "ITEMRAG_API_KEY"


class TokenProvider:
    """Base class for token providers."""

    def get_token(self) -> Optional[str]:
        """Return the token, or None when this source has none."""
        raise NotImplementedError


class StaticTokenProvider(TokenProvider):
    """Token provider that returns a static token."""

    def __init__(self, token: Union[str, SecretStr, None]):
        if isinstance(token, SecretStr):
            token = token.get_secret_value()
        self._token = token or None

    def get_token(self) -> Optional[str]:
        return self._token


class EnvironmentTokenProvider(TokenProvider):
    """Token provider that reads the token from an environment variable."""

    def __init__(self, env_var: str = API_KEY_ENV):
        self.env_var = env_var

    def get_token(self) -> Optional[str]:
        return os.getenv(self.env_var) or None


def resolve_api_key(
    endpoint: str,
    api_key: Union[str, SecretStr, None] = None,
    env_var: str = API_KEY_ENV,
) -> SecretStr:
    """
    First credential found among an explicit key and the environment.

    Raises:
        AuthenticationError: If no source yields a credential
    """
    providers: List[TokenProvider] = [StaticTokenProvider(api_key), EnvironmentTokenProvider(env_var)]

    for provider in providers:
        token = provider.get_token()
        if token:
            return SecretStr(token)

    raise AuthenticationError(
        endpoint,
        status_code=None,
        message=f"No API credential configured for {endpoint}; set {env_var}",
    )
