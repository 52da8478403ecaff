"""Router Agent Tests"""
