"""Experiment orchestration

stages holds the path-in, path-out stage functions shared by the command
line and the graph nodes; experiment assembles the LangGraph pipeline.
Import create_experiment_graph from src.pipelines.experiment.
"""
