from typing import *
from abc import ABC, abstractmethod


class Agent(ABC):
    """
    A base class for agents facing all P tasks of a family in lockstep.
    """

    name: str = 'agent'

    @abstractmethod
    def plan_round(
        self,
        start_states: List[int],
        **kwargs
    ):
        """
        Plan every task for the coming episode; returns one plan per task
        with Q of shape (H, |S|, |A|) and V of shape (H+1, |S|).
        """
        pass

    @abstractmethod
    def update_round(
        self,
        episodes,
        **kwargs
    ):
        """
        Absorb one finished episode per task.
        """
        pass
